//! Keeps the guide's code snippets compiling: every chapter with runnable
//! examples is included here as a doc comment so `cargo test` runs them.

macro_rules! chapter {
    ($name:ident, $path:literal) => {
        #[doc = include_str!($path)]
        #[allow(unused)]
        pub mod $name {}
    };
}

chapter!(descriptors, "../../../book/src/descriptors.md");
chapter!(fields, "../../../book/src/fields.md");
chapter!(operations, "../../../book/src/operations.md");
chapter!(slices, "../../../book/src/slices.md");
chapter!(pages, "../../../book/src/pages.md");
chapter!(stems, "../../../book/src/stems.md");
