//! All applicable bounds for each geometry family, plus a geometry read from JSON.

use channel_infsup::bounds::all_bounds;
use channel_infsup::cli::render_bound_table;
use channel_infsup::geometry::ChannelGeometry;

fn main() -> channel_infsup::Result<()> {
    let geometries = [
        ("constant", ChannelGeometry::constant(1.0, 1.0)?),
        ("constant, L = 10", ChannelGeometry::constant(10.0, 1.0)?),
        ("cosine", ChannelGeometry::cosine(1.0, 1.0, 0.25)?),
        ("gap, h0 = 0.01", ChannelGeometry::gap(1.0, 0.01, None)?),
        ("sawtooth", ChannelGeometry::sawtooth(1.0, 0.5, 1.0)?),
        ("sampled", ChannelGeometry::from_json(r#"{"L": 2, "nodes": [[0, 1], [0.7, 0.4], [1.5, 0.8], [2, 1]]}"#)?),
    ];
    for (name, g) in &geometries {
        let s = g.summary();
        println!("{name}: h0 = {:.4}, h1 = {:.4}, M = {:.4}, class {:?}", s.h0, s.h1, s.m, s.class);
        print!("{}", render_bound_table(&all_bounds(g)));
        println!();
    }
    Ok(())
}
