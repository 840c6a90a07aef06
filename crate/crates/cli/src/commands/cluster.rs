//! `baire cluster`: ingest, build the prefix tree, export level partitions.

use serde_json::json;

use baire::redshift::Series;
use baire::tree::{BaireTree, MemberPolicy};

use crate::args::ClusterArgs;
use crate::errors::AppError;
use crate::outputs::{ensure_dir, out_path, write_json, write_text};

pub fn run(args: ClusterArgs) -> Result<(), AppError> {
    ensure_dir(&args.out_dir)?;

    let tree = if let Some(tree_path) = &args.load_tree {
        BaireTree::load(tree_path)?
    } else {
        let params = args.encoding.params()?;
        let depth = args.depth.unwrap_or(params.precision());
        let input = args
            .input
            .as_ref()
            .ok_or_else(|| AppError::validation("either --input or --load-tree is required"))?;
        let ingest =
            super::ingest_with_report(input, &args.filter.ingest_options()?, &args.out_dir)?;
        let series: Series = args.series.into();
        BaireTree::build(
            ingest.records.iter().map(|r| (r.id, series.value(r))),
            params,
            depth,
            MemberPolicy::Leaves,
        )?
    };

    let depth = tree.max_depth();
    let mut levels = Vec::with_capacity(depth + 1);
    let mut nodes_per_level = Vec::with_capacity(depth + 1);
    for d in 0..=depth {
        let partition = tree.level_partition(d)?;
        nodes_per_level.push(partition.len());
        let clusters: Vec<_> = partition
            .iter()
            .map(|(path, count)| json!({ "path": path.render(tree.params().base()), "count": count }))
            .collect();
        levels.push(json!({ "depth": d, "clusters": clusters }));
    }

    let summary = json!({
        "params": tree.params(),
        "max_depth": depth,
        "n_items": tree.n_items(),
        "rejected_non_finite": tree.rejected_ids().len(),
        "total_nodes": tree.node_count(),
        "nodes_per_level": nodes_per_level,
    });
    write_json(&out_path(&args.out_dir, "tree_summary.json"), &summary)?;

    if args.format.json() {
        let partitions = json!({ "max_depth": depth, "levels": levels });
        write_json(&out_path(&args.out_dir, "partitions.json"), &partitions)?;
    }
    if args.format.csv() {
        let mut csv = String::from("depth,path,count\n");
        for d in 0..=depth {
            for (path, count) in tree.level_partition(d)? {
                csv.push_str(&format!(
                    "{d},{},{count}\n",
                    path.render(tree.params().base())
                ));
            }
        }
        write_text(&out_path(&args.out_dir, "partitions.csv"), &csv)?;
    }

    if let Some(save) = &args.save_tree {
        tree.save(save)?;
    }

    println!(
        "clustered {} observations to depth {depth}; {} populated nodes; outputs in {}",
        tree.n_items(),
        tree.node_count(),
        args.out_dir.display()
    );
    Ok(())
}
