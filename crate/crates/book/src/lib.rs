//! The guide's chapters, compiled so their snippets run as doctests.

macro_rules! chapter {
    ($name:ident, $file:literal) => {
        #[doc = include_str!(concat!("../../../book/src/", $file))]
        pub mod $name {}
    };
}

chapter!(introduction, "introduction.md");
chapter!(domain, "domain.md");
chapter!(noise_models, "noise-models.md");
chapter!(ice, "ice.md");
chapter!(amplification, "amplification.md");
chapter!(codes, "codes.md");
chapter!(cryptoprim, "cryptoprim.md");
chapter!(separation, "separation.md");
chapter!(ice_separation, "ice-separation.md");
chapter!(experiments, "experiments.md");
chapter!(file_formats, "file-formats.md");

#[doc = include_str!("../../../README.md")]
pub mod readme {}
