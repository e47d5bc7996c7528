fn main() {}
#[test]
fn placeholder() {}
