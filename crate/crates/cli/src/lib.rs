//! Front ends for the virtual gap analysis engine: the `vga` command line tool and
//! its HTTP service.

pub mod commands;
pub mod service;
