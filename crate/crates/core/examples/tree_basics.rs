//! Addressing on the rooted Cayley tree: children, parents, volumes.

use kittel_zipper::tree::{self, VertexId};

fn main() -> kittel_zipper::Result<()> {
    let k = 3;
    let x = VertexId::from_path(vec![1, 2]);
    println!("vertex {x} at depth {}", x.depth());
    let children: Vec<String> = x.children(k)?.iter().map(ToString::to_string).collect();
    println!("children: {}", children.join(", "));
    let path: Vec<String> = x.path_to_root().iter().map(ToString::to_string).collect();
    println!("path to root: {}", path.join(" -> "));
    println!("level-order index {} (inverse {})", x.level_index(k), VertexId::from_level_index(k, x.level_index(k)));
    for n in 0..=5 {
        println!("n = {n}: |W_n| = {:>4}, |V_n| = {:>4}", tree::generation_size(k, n), tree::volume(k, n));
    }
    Ok(())
}
