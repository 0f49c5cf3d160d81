use nalgebra::DMatrix;

use super::NetworkModel;

/// Susceptance Laplacian of the zone graph, per unit.
///
/// Off-diagonal `(i, j)` holds minus the summed susceptance of the lines
/// between `i` and `j`; diagonals make every row sum to zero.
pub fn build_coupling_matrix(model: &NetworkModel) -> DMatrix<f64> {
    let index = model.zone_index();
    let n = model.zones.len();
    let mut matrix = DMatrix::zeros(n, n);
    for line in &model.lines {
        let (a, b) = (index[line.from.as_str()], index[line.to.as_str()]);
        matrix[(a, b)] -= line.susceptance;
        matrix[(b, a)] -= line.susceptance;
        matrix[(a, a)] += line.susceptance;
        matrix[(b, b)] += line.susceptance;
    }
    matrix
}
