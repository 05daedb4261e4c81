//! Runs every code block in the guide (`book/`) as a doctest, one module per
//! chapter so a failure names its source file. mdbook itself cannot execute
//! snippets against the crate, so this module is what keeps the book honest.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}
#[doc = include_str!("../../../book/src/polarization.md")]
mod polarization {}
#[doc = include_str!("../../../book/src/device.md")]
mod device {}
#[doc = include_str!("../../../book/src/pbit.md")]
mod pbit {}
#[doc = include_str!("../../../book/src/ilnetwork.md")]
mod ilnetwork {}
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
