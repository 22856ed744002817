//! Small hand-drawn graphs used by tests and the runnable examples.

/// Three movies (A, B, C) and five people. A, B and C share writers 1 and 6;
/// B has two more writers (4, 7); C alone has directors (1, 5).
pub const TOY_MOVIES: &str = "\
A\twritten_by\t1
A\twritten_by\t6
B\twritten_by\t1
B\twritten_by\t6
B\twritten_by\t4
B\twritten_by\t7
C\twritten_by\t1
C\twritten_by\t6
C\tdirected_by\t1
C\tdirected_by\t5
";
