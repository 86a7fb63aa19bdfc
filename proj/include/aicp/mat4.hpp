#pragma once

#include <array>

namespace aicp {

using Vec4 = std::array<double, 4>;
using Matrix4 = std::array<std::array<double, 4>, 4>;  // row-major

Matrix4 identity4();

// x' * m * x
double quadratic_form(const Matrix4& m, const Vec4& x);

Matrix4 matmul(const Matrix4& a, const Matrix4& b);
Matrix4 transpose(const Matrix4& a);

// a' * a  (symmetric PSD by construction)
Matrix4 gram(const Matrix4& a);

double frobenius_norm(const Matrix4& a);
double max_abs_asymmetry(const Matrix4& a);

struct EigenDecomposition {
    Vec4 values;      // ascending
    Matrix4 vectors;  // columns are the matching eigenvectors
};

// Cyclic Jacobi rotations; input must be symmetric.
EigenDecomposition eigen_symmetric(const Matrix4& a);

// A factor f with f' * f == m for symmetric PSD m. Eigenvalues below zero are
// floored at zero, so the result is the nearest-PSD factor for inputs within
// tolerance of the cone.
Matrix4 psd_factor(const Matrix4& m);

}  // namespace aicp
