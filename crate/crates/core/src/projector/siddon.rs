use crate::error::{Error, Result};
use crate::geometry::VolumeGrid;
use crate::volume::Volume3D;

/// Walks the segment `src → dst` through the voxel boxes of `grid`, calling
/// `visit(voxel_index, intersection_length_mm)` once per traversed segment in
/// order of increasing distance from `src`.
///
/// Crossing parameters of every voxel plane are merged and sorted; each
/// interval is attributed to the voxel containing its midpoint. A ray lying
/// exactly in a voxel face plane is therefore attributed to the voxel on the
/// positive side of that plane.
pub fn siddon_trace(
    grid: &VolumeGrid,
    src: [f64; 3],
    dst: [f64; 3],
    mut visit: impl FnMut(usize, f64),
) -> Result<()> {
    let dir = [dst[0] - src[0], dst[1] - src[1], dst[2] - src[2]];
    let length = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    if length == 0.0 {
        return Err(Error::Param(
            "degenerate ray: source equals destination".into(),
        ));
    }
    let half = grid.half_extent();
    let lo = [-half[0], -half[1], -half[2]];

    let mut a_min = 0.0f64;
    let mut a_max = 1.0f64;
    for axis in 0..3 {
        if dir[axis] == 0.0 {
            // half-open box so a ray on the top face plane falls outside
            if src[axis] < lo[axis] || src[axis] >= half[axis] {
                return Ok(());
            }
            continue;
        }
        let a0 = (lo[axis] - src[axis]) / dir[axis];
        let a1 = (half[axis] - src[axis]) / dir[axis];
        a_min = a_min.max(a0.min(a1));
        a_max = a_max.min(a0.max(a1));
    }
    if a_min >= a_max {
        return Ok(());
    }

    let mut alphas = vec![a_min, a_max];
    for axis in 0..3 {
        if dir[axis] == 0.0 {
            continue;
        }
        for m in 0..=grid.dims[axis] {
            let plane = lo[axis] + m as f64 * grid.spacing[axis];
            let a = (plane - src[axis]) / dir[axis];
            if a > a_min && a < a_max {
                alphas.push(a);
            }
        }
    }
    alphas.sort_by(f64::total_cmp);

    for w in alphas.windows(2) {
        let (a0, a1) = (w[0], w[1]);
        if a1 <= a0 {
            continue;
        }
        let mid = 0.5 * (a0 + a1);
        let mut idx = [0usize; 3];
        for axis in 0..3 {
            let pos = if dir[axis] == 0.0 {
                src[axis]
            } else {
                src[axis] + mid * dir[axis]
            };
            let c = ((pos - lo[axis]) / grid.spacing[axis]).floor();
            idx[axis] = (c.max(0.0) as usize).min(grid.dims[axis] - 1);
        }
        visit(grid.index(idx[0], idx[1], idx[2]), (a1 - a0) * length);
    }
    Ok(())
}

/// Exact radiological path of the segment `src → dst` through constant-valued
/// voxel boxes, in intensity·mm.
pub fn siddon_line_integral(volume: &Volume3D, src: [f64; 3], dst: [f64; 3]) -> Result<f64> {
    let mut acc = 0.0;
    siddon_trace(&volume.grid, src, dst, |idx, len| {
        acc += len * volume.data[idx] as f64;
    })?;
    Ok(acc)
}
