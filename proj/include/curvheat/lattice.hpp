#pragma once

#include <vector>

namespace curvheat {

// Lowest `count` eigenvalues of the U(1)-link lattice Laplacian on a
// grid_n x grid_n periodic grid (unit area) with total flux 2 pi p d,
// shifted by -2 pi p d so the values model D_p^2 on degree 0.
// Brute-force oracle for the torus Landau ladders; converges O(grid_n^-2).
std::vector<double> lattice_magnetic_eigs(int d, int p, int grid_n, int count);

}  // namespace curvheat
