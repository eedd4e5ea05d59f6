//! Rate-memory tables comparing the scheme against the lower bound.

use num_rational::BigRational;
use serde::Serialize;

use crate::converse::{lower_bound_curve, solve_lp};
use crate::error::Result;
use crate::scalar::{fmt_exact, serialize_exact, Scalar};
use crate::scheme::{achievable_load_at_memory, corner_point_load};

pub const CSV_HEADER: &str = "t,M,R_lb,R_ach,gap";

/// One `(M, R)` sample: `t = ΛM/N`, lower bound, achievable load and their gap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TradeoffRow {
    #[serde(serialize_with = "serialize_exact")]
    pub t: BigRational,
    #[serde(rename = "M", serialize_with = "serialize_exact")]
    pub memory: BigRational,
    #[serde(rename = "R_lb", serialize_with = "serialize_exact")]
    pub lower_bound: BigRational,
    #[serde(rename = "R_ach", serialize_with = "serialize_exact")]
    pub achievable: BigRational,
    #[serde(serialize_with = "serialize_exact")]
    pub gap: BigRational,
}

/// Rows at every corner `t ∈ [0, Λ]`.
pub fn corner_rows(num_caches: usize, access: usize, num_files: usize) -> Result<Vec<TradeoffRow>> {
    let curve = lower_bound_curve::<BigRational>(num_caches, access, num_files)?;
    curve
        .corner_points
        .into_iter()
        .map(|p| {
            let achievable = corner_point_load::<BigRational>(num_caches, access, p.t)?;
            Ok(TradeoffRow {
                t: BigRational::from_integer(p.t.into()),
                gap: &achievable - &p.load,
                memory: p.memory,
                lower_bound: p.load,
                achievable,
            })
        })
        .collect()
}

/// `points` evenly spaced memory values over `[0, N]` (endpoints included),
/// using memory sharing for the scheme and the LP optimum for the bound.
pub fn grid_rows(
    num_caches: usize,
    access: usize,
    num_files: usize,
    points: usize,
) -> Result<Vec<TradeoffRow>> {
    let steps = points.saturating_sub(1).max(1);
    (0..points)
        .map(|j| {
            let memory = BigRational::new((j * num_files).into(), steps.into());
            row_at(num_caches, access, num_files, memory)
        })
        .collect()
}

pub fn row_at(
    num_caches: usize,
    access: usize,
    num_files: usize,
    memory: BigRational,
) -> Result<TradeoffRow> {
    let lower_bound = solve_lp(num_caches, access, num_files, &memory)?.value;
    let achievable = achievable_load_at_memory(num_caches, access, num_files, &memory)?;
    Ok(TradeoffRow {
        t: &memory * BigRational::from_integer(num_caches.into())
            / BigRational::from_integer(num_files.into()),
        gap: &achievable - &lower_bound,
        memory,
        lower_bound,
        achievable,
    })
}

/// CSV with exact `p/q` cells. With `float`, decimal copies of the two load
/// columns are appended; the exact columns are always present.
pub fn write_csv(rows: &[TradeoffRow], float: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    if float {
        out.push_str(",R_lb_float,R_ach_float");
    }
    out.push('\n');
    for r in rows {
        let cells = [&r.t, &r.memory, &r.lower_bound, &r.achievable, &r.gap];
        let exact: Vec<String> = cells.iter().map(|v| fmt_exact(v)).collect();
        out.push_str(&exact.join(","));
        if float {
            out.push_str(&format!(
                ",{},{}",
                r.lower_bound.to_f64_lossy(),
                r.achievable.to_f64_lossy()
            ));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_table_4_2_6() {
        let csv = write_csv(&corner_rows(4, 2, 6).unwrap(), false);
        assert_eq!(
            csv,
            "t,M,R_lb,R_ach,gap\n\
             0/1,0/1,6/1,6/1,0/1\n\
             1/1,3/2,1/1,1/1,0/1\n\
             2/1,3/1,1/6,1/6,0/1\n\
             3/1,9/2,0/1,0/1,0/1\n\
             4/1,6/1,0/1,0/1,0/1\n"
        );
    }

    #[test]
    fn corner_table_5_2_10() {
        let rows = corner_rows(5, 2, 10).unwrap();
        let loads: Vec<String> = rows.iter().map(|r| fmt_exact(&r.lower_bound)).collect();
        assert_eq!(loads, ["10/1", "2/1", "1/2", "1/10", "0/1", "0/1"]);
        let mems: Vec<String> = rows.iter().map(|r| fmt_exact(&r.memory)).collect();
        assert_eq!(mems, ["0/1", "2/1", "4/1", "6/1", "8/1", "10/1"]);
    }

    #[test]
    fn grid_has_zero_gap() {
        let rows = grid_rows(4, 2, 6, 25).unwrap();
        assert_eq!(rows.len(), 25);
        assert!(rows
            .iter()
            .all(|r| r.gap == BigRational::from_integer(0.into())));
        assert_eq!(
            rows.last().unwrap().memory,
            BigRational::from_integer(6.into())
        );
    }

    #[test]
    fn float_columns_are_appended() {
        let csv = write_csv(&corner_rows(4, 2, 6).unwrap(), true);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,M,R_lb,R_ach,gap,R_lb_float,R_ach_float"
        );
        assert_eq!(
            lines.nth(2).unwrap(),
            "2/1,3/1,1/6,1/6,0/1,0.16666666666666666,0.16666666666666666"
        );
    }
}
