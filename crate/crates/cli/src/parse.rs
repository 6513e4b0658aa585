use anyhow::{anyhow, bail, Context, Result};

/// `7`, `1..40` (inclusive) or `5,10,20`.
pub fn int_list(spec: &str) -> Result<Vec<usize>> {
    let spec = spec.trim();
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo
            .trim()
            .parse()
            .with_context(|| format!("bad range start in '{spec}'"))?;
        let hi: usize = hi
            .trim()
            .parse()
            .with_context(|| format!("bad range end in '{spec}'"))?;
        if lo > hi {
            bail!("empty range '{spec}'");
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .with_context(|| format!("'{s}' is not a nonnegative integer"))
        })
        .collect()
}

/// Player groups separated by `;`, points within a group by `,`. A single
/// group applies to every player.
pub fn grids(spec: &str, players: usize) -> Result<Vec<Vec<f64>>> {
    let groups: Vec<Vec<f64>> = spec
        .split(';')
        .map(|g| {
            g.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| anyhow!("'{s}' is not a number in grid '{spec}'"))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    match groups.len() {
        1 => Ok(vec![groups[0].clone(); players]),
        n if n == players => Ok(groups),
        n => bail!("grid has {n} groups for {players} players"),
    }
}
