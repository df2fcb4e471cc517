use anyhow::{bail, Result};
use clap::Args;

use blockwish::maps::{builtin_map, choi_from_map, easy_choi, map_from_choi, twisted_choi};
use blockwish::{ChoiMatrix, LinearBlockMap, Partition};

/// A block map given either as a partition literal at base `N` or as a builtin name at
/// inner dimension `n`.
#[derive(Args, Clone, Debug, Default)]
pub struct SourceArgs {
    /// Partition literal such as `ab/ba`.
    #[arg(long, conflicts_with = "map")]
    pub pi: Option<String>,
    /// Builtin map: identity, transpose, trace-unit, diagonal, twisted-crossing, bessel, bessel:r.
    #[arg(long)]
    pub map: Option<String>,
    /// Base dimension for a partition; the inner dimension is N^s.
    #[arg(long = "N")]
    pub base: Option<usize>,
    /// Inner dimension for a builtin map.
    #[arg(long = "n")]
    pub inner: Option<usize>,
    /// Use the signed (twisted) Choi matrix of the partition.
    #[arg(long)]
    pub twisted: bool,
}

pub struct Resolved {
    pub label: String,
    pub partition: Option<Partition>,
    pub base: Option<usize>,
    pub twisted: bool,
    pub choi: ChoiMatrix,
    pub map: LinearBlockMap,
}

impl SourceArgs {
    pub fn resolve(&self) -> Result<Resolved> {
        match (&self.pi, &self.map) {
            (Some(literal), None) => {
                let pi: Partition = literal.parse()?;
                let Some(base) = self.base else { bail!("--pi needs the base dimension --N") };
                let choi = if self.twisted { twisted_choi(&pi, base)? } else { easy_choi(&pi, base)? };
                if let Some(n) = self.inner {
                    if n != choi.inner_dim() {
                        bail!("--n {n} contradicts N^s = {} for {pi}", choi.inner_dim());
                    }
                }
                Ok(Resolved {
                    label: pi.to_string(),
                    map: map_from_choi(&choi),
                    partition: Some(pi),
                    base: Some(base),
                    twisted: self.twisted,
                    choi,
                })
            }
            (None, Some(name)) => {
                if self.twisted {
                    bail!("--twisted applies to partitions, not to builtin maps");
                }
                if self.base.is_some() {
                    bail!("--N applies to partitions; give the inner dimension of a builtin map with --n");
                }
                let Some(n) = self.inner else { bail!("--map needs the inner dimension --n") };
                let map = builtin_map(name, n)?;
                Ok(Resolved {
                    label: name.trim().to_string(),
                    choi: choi_from_map(&map),
                    partition: None,
                    base: None,
                    twisted: false,
                    map,
                })
            }
            _ => bail!("give exactly one of --pi and --map"),
        }
    }
}
