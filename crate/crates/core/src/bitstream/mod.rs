//! Container format and the sequence encoder/decoder.

mod codec;
mod config;
mod container;

pub use self::codec::{
    decode_sequence, decode_sequence_detailed, encode_sequence, DecodedSequence, EncodeReport,
    EncodedSequence, FrameKind, FrameReport, FrameTrace, StageTimings,
};
pub use self::config::{AnchorPipeline, CodecConfig, RATE_POINTS};
pub use self::container::{
    read_container, ContainerWriter, PayloadReader, Section, SectionKind, FILE_OVERHEAD, MAGIC,
    SECTION_OVERHEAD, VERSION,
};
