mod embed;
mod pipeline;
mod tree;

pub use embed::{
    embed_rainbow_surplus_within, embed_tree_rainbow_few_surplus, embed_tree_rainbow_surplus, embed_tree_rooted,
    greedy_colour_cover_tree,
};
pub use pipeline::rainbow_spanning_tree;
pub use tree::{decompose_piece, decompose_tree, split_four, split_piece, split_tree, FourSplit, Piece, Tree};
