use crate::linalg::{matmul_naive, FieldMatrix, MultCounter};

use super::{BilinearError, VerifiedScheme};

/// Multiplies `A B` by applying the scheme recursively to block partitions.
///
/// At each of the `depth` levels the operands are cut into the scheme's
/// `a x b` and `b x c` block grids and every rank term becomes one recursive
/// block product. Leaves use [`matmul_naive`], so a rank-`T` scheme performs
/// exactly `T^depth` leaf products (visible in `counter.base_products`).
/// Block linear combinations with `±1` coefficients are not counted as
/// multiplications.
pub fn lift_apply(
    scheme: &VerifiedScheme,
    a: &FieldMatrix,
    b: &FieldMatrix,
    depth: usize,
    counter: &mut MultCounter,
) -> Result<FieldMatrix, BilinearError> {
    scheme.check_field(a)?;
    scheme.check_field(b)?;
    let (sa, sb, sc) = scheme.dims();
    let lift_err = || BilinearError::Lift {
        dims: scheme.dims(),
        depth,
        left: a.shape(),
        right: b.shape(),
    };
    if a.cols() != b.rows() {
        return Err(lift_err());
    }
    let divides = |d: usize, n: usize| {
        d.checked_pow(depth as u32)
            .is_some_and(|q| n.is_multiple_of(q) && n >= q)
    };
    if !divides(sa, a.rows()) || !divides(sb, a.cols()) || !divides(sc, b.cols()) {
        return Err(lift_err());
    }
    Ok(lift_rec(scheme, a, b, depth, counter))
}

fn lift_rec(
    scheme: &VerifiedScheme,
    a: &FieldMatrix,
    b: &FieldMatrix,
    depth: usize,
    counter: &mut MultCounter,
) -> FieldMatrix {
    if depth == 0 {
        return matmul_naive(a, b, counter).expect("shapes checked by caller");
    }
    let f = scheme.field();
    let (sa, sb, sc) = scheme.dims();
    let ga = a.split_grid(sa, sb);
    let gb = b.split_grid(sb, sc);
    let (br, bk) = ga[0][0].shape();
    let bc = gb[0][0].cols();
    let mut gc: Vec<Vec<FieldMatrix>> = (0..sa)
        .map(|_| (0..sc).map(|_| FieldMatrix::zeros(f, br, bc)).collect())
        .collect();

    // column-major position -> (row, col) in a grid with `rows` block rows
    let at = |idx: usize, rows: usize| (idx % rows, idx / rows);

    for r in 0..scheme.rank() {
        let left = combine(scheme, &scheme.u[r], &scheme.scheme.u[r], &ga, sa, (br, bk), counter);
        let right = combine(scheme, &scheme.v[r], &scheme.scheme.v[r], &gb, sb, (bk, bc), counter);
        let prod = lift_rec(scheme, &left, &right, depth - 1, counter);
        for (idx, (&wc, &wi)) in scheme.w[r].iter().zip(&scheme.scheme.w[r]).enumerate() {
            if wc == 0 {
                continue;
            }
            let (i, l) = at(idx, sa);
            accumulate(&mut gc[i][l], &prod, f.element(wc), wi, counter);
        }
    }
    FieldMatrix::from_block_grid(&gc).expect("blocks share a shape")
}

fn combine(
    scheme: &VerifiedScheme,
    reduced: &[u64],
    integer: &[i64],
    grid: &[Vec<FieldMatrix>],
    grid_rows: usize,
    shape: (usize, usize),
    counter: &mut MultCounter,
) -> FieldMatrix {
    let f = scheme.field();
    let mut out = FieldMatrix::zeros(f, shape.0, shape.1);
    for (idx, (&c, &ci)) in reduced.iter().zip(integer).enumerate() {
        if c != 0 {
            let block = &grid[idx % grid_rows][idx / grid_rows];
            accumulate(&mut out, block, f.element(c), ci, counter);
        }
    }
    out
}

fn accumulate(
    dst: &mut FieldMatrix,
    src: &FieldMatrix,
    coef: crate::field::FieldElement,
    integer_coef: i64,
    counter: &mut MultCounter,
) {
    let mut scratch = MultCounter::new();
    dst.add_scaled_assign(src, coef, &mut scratch)
        .expect("blocks share a shape");
    if integer_coef.unsigned_abs() > 1 {
        counter.add_scalar((src.rows() * src.cols()) as u64);
    }
}
