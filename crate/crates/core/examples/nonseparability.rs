//! Singlet versus triplet: identical local states, orthogonal global states.

fn main() {
    let r = conelab::audit::nonseparability_demo();
    println!("{r:#?}");
}
