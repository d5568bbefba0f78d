use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::VolumeGrid;
use crate::volume::Volume3D;

/// Trilinear resampling onto a new isocenter-centred grid. Target centres
/// outside the source grid take the nearest edge value.
pub fn resample_volume(
    volume: &Volume3D,
    target_dims: [usize; 3],
    target_spacing: [f64; 3],
) -> Result<Volume3D> {
    let target = VolumeGrid {
        dims: target_dims,
        spacing: target_spacing,
    };
    target.validate()?;
    if target == volume.grid {
        return Ok(volume.clone());
    }
    let src = volume.grid;
    let [nx, ny, nz] = target_dims;
    let mut out = Volume3D::zeros(target);
    out.data
        .par_chunks_mut(nx * ny)
        .enumerate()
        .for_each(|(k, slab)| {
            let z = target.center(2, k);
            for j in 0..ny {
                let y = target.center(1, j);
                for i in 0..nx {
                    let x = target.center(0, i);
                    slab[j * nx + i] =
                        crate::projector::sample_trilinear(&src, &volume.data, [x, y, z]) as f32;
                }
            }
        });
    debug_assert_eq!(out.data.len(), nx * ny * nz);
    Ok(out)
}
