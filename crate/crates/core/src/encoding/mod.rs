//! Token encoding and dataset files.

mod store;
mod vocab;

pub use store::{
    format_record, parse_record, read_dataset, read_manifest, write_dataset, Manifest, StoreError, WriteOptions,
    GENERATOR_VERSION, MANIFEST_FILE, SCHEMA_VERSION, TEST_FILE, TOKEN_LAYOUT, TRAIN_FILE,
};
pub use vocab::{
    decode, decode_with, encode, encode_with, DecodeError, Decoded, EncodeError, EncodedInstance, KeyEncoding,
    TokenId, Vocabulary, BOS, EOS, SEP, UNARY_KEY_LETTER, VOCAB_SIZE,
};
