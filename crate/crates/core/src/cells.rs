//! Cell decomposition of the offset domain w in [-1/2, 1/2] for the tensor
//! midpoint rule. Offsets live on the same grid as the curve: cell i is
//! centered at w = i/N (mapped to (-1/2, 1/2]) with width 1/N. The cell at
//! w = +-1/2 is a single folded cell of total measure 1/N. Cut domains are
//! realized exactly: boundary cells are split and their off-grid midpoints
//! are evaluated by trigonometric translation.

/// One quadrature cell of the w-domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Cell {
    /// Full cell centered on the grid offset i (signed w = i/N or i/N - 1).
    OnGrid { i: usize, width: f64 },
    /// Partial or split cell evaluated at the off-grid signed offset w.
    Shifted { w: f64, width: f64 },
}

/// Cells covering {|w| >= eps}. With `split_top` the folded cell at
/// |w| = 1/2 is split into two signed half-cells (needed by integrands
/// that are not symmetric across the seam).
pub(crate) fn outer_cells(n: usize, eps: f64, split_top: bool) -> Vec<Cell> {
    let h = 1.0 / n as f64;
    let mut cells = Vec::with_capacity(n);
    for i in 1..n {
        if i == n / 2 {
            continue;
        }
        let w_abs = (i.min(n - i)) as f64 / n as f64;
        let lo = w_abs - 0.5 * h;
        let hi = w_abs + 0.5 * h;
        if hi <= eps {
            continue;
        }
        if lo >= eps {
            cells.push(Cell::OnGrid { i, width: h });
        } else {
            let sign = if i <= n / 2 { 1.0 } else { -1.0 };
            cells.push(Cell::Shifted { w: sign * 0.5 * (eps + hi), width: hi - eps });
        }
    }
    // folded top cell: |w| in [1/2 - h/2, 1/2], measure h
    let lo = 0.5 - 0.5 * h;
    if eps < 0.5 {
        if split_top {
            if eps <= lo {
                let wm = 0.5 - 0.25 * h;
                cells.push(Cell::Shifted { w: wm, width: 0.5 * h });
                cells.push(Cell::Shifted { w: -wm, width: 0.5 * h });
            } else {
                let wm = 0.5 * (eps + 0.5);
                cells.push(Cell::Shifted { w: wm, width: 0.5 - eps });
                cells.push(Cell::Shifted { w: -wm, width: 0.5 - eps });
            }
        } else if eps <= lo {
            cells.push(Cell::OnGrid { i: n / 2, width: h });
        } else {
            cells.push(Cell::Shifted { w: 0.5 * (eps + 0.5), width: 2.0 * (0.5 - eps) });
        }
    }
    cells
}

/// Cells covering {|w| <= eps} except the zero cell |w| < h/2
/// (whose contribution callers model analytically).
pub(crate) fn inner_cells(n: usize, eps: f64) -> Vec<Cell> {
    let h = 1.0 / n as f64;
    let mut cells = Vec::with_capacity(n);
    for i in 1..n {
        if i == n / 2 {
            continue;
        }
        let w_abs = (i.min(n - i)) as f64 / n as f64;
        let lo = w_abs - 0.5 * h;
        let hi = w_abs + 0.5 * h;
        if lo >= eps {
            continue;
        }
        if hi <= eps {
            cells.push(Cell::OnGrid { i, width: h });
        } else {
            let sign = if i <= n / 2 { 1.0 } else { -1.0 };
            cells.push(Cell::Shifted { w: sign * 0.5 * (lo + eps), width: eps - lo });
        }
    }
    let lo = 0.5 - 0.5 * h;
    if eps >= 0.5 {
        cells.push(Cell::OnGrid { i: n / 2, width: h });
    } else if eps > lo {
        cells.push(Cell::Shifted { w: 0.5 * (lo + eps), width: 2.0 * (eps - lo) });
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    fn measure(cells: &[Cell]) -> f64 {
        cells
            .iter()
            .map(|c| match c {
                Cell::OnGrid { width, .. } | Cell::Shifted { width, .. } => *width,
            })
            .sum()
    }

    #[test]
    fn outer_full_domain_measure() {
        let n = 64;
        let cells = outer_cells(n, 0.0, false);
        // everything except the zero cell of width 1/n
        let expect = 1.0 - 1.0 / n as f64;
        assert!((measure(&cells) - expect).abs() < 1e-14);
    }

    #[test]
    fn outer_and_inner_partition() {
        let n = 64;
        for eps in [0.1, 0.25, 0.3717, 0.499] {
            let outer = measure(&outer_cells(n, eps, false));
            let inner = measure(&inner_cells(n, eps));
            // inner excludes the zero cell
            assert!((outer - 2.0 * (0.5 - eps)).abs() < 1e-13, "eps={eps}");
            assert!((inner - (2.0 * eps - 1.0 / n as f64)).abs() < 1e-13, "eps={eps}");
        }
    }

    #[test]
    fn split_top_preserves_measure() {
        let n = 64;
        let a = measure(&outer_cells(n, 0.05, false));
        let b = measure(&outer_cells(n, 0.05, true));
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn inner_full_at_half() {
        let n = 64;
        let cells = inner_cells(n, 0.5);
        assert!((measure(&cells) - (1.0 - 1.0 / n as f64)).abs() < 1e-14);
        // identical to the full outer sweep
        assert_eq!(cells.len(), outer_cells(n, 0.0, false).len());
    }
}
