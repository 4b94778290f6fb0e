//! Placeholder; filled in once the model forward pass lands.

fn main() {}
