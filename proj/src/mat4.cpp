#include "aicp/mat4.hpp"

#include <algorithm>
#include <cmath>

namespace aicp {

Matrix4 identity4() {
    Matrix4 m{};
    for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
    return m;
}

double quadratic_form(const Matrix4& m, const Vec4& x) {
    double total = 0.0;
    for (int i = 0; i < 4; ++i) {
        double row = 0.0;
        for (int j = 0; j < 4; ++j) {
            row += m[i][j] * x[j];
        }
        total += x[i] * row;
    }
    return total;
}

Matrix4 matmul(const Matrix4& a, const Matrix4& b) {
    Matrix4 c{};
    for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 4; ++k) {
            const double aik = a[i][k];
            for (int j = 0; j < 4; ++j) {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    return c;
}

Matrix4 transpose(const Matrix4& a) {
    Matrix4 t;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            t[i][j] = a[j][i];
        }
    }
    return t;
}

Matrix4 gram(const Matrix4& a) { return matmul(transpose(a), a); }

double frobenius_norm(const Matrix4& a) {
    double sum = 0.0;
    for (const auto& row : a) {
        for (double x : row) sum += x * x;
    }
    return std::sqrt(sum);
}

double max_abs_asymmetry(const Matrix4& a) {
    double worst = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            worst = std::max(worst, std::abs(a[i][j] - a[j][i]));
        }
    }
    return worst;
}

EigenDecomposition eigen_symmetric(const Matrix4& input) {
    Matrix4 a = input;
    Matrix4 v = identity4();

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < 4; ++i) {
            for (int j = i + 1; j < 4; ++j) {
                off += a[i][j] * a[i][j];
            }
        }
        if (off < 1e-30) break;

        for (int p = 0; p < 4; ++p) {
            for (int q = p + 1; q < 4; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) +
                                  std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int k = 0; k < 4; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 4; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 4; ++k) {
                    const double vkp = v[k][p];
                    const double vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    EigenDecomposition out;
    std::array<int, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(),
              [&a](int x, int y) { return a[x][x] < a[y][y]; });
    for (int i = 0; i < 4; ++i) {
        out.values[i] = a[order[i]][order[i]];
        for (int k = 0; k < 4; ++k) {
            out.vectors[k][i] = v[k][order[i]];
        }
    }
    return out;
}

Matrix4 psd_factor(const Matrix4& m) {
    EigenDecomposition ed = eigen_symmetric(m);
    // factor = diag(sqrt(lambda)) * V', so factor' * factor = V diag(l) V'.
    Matrix4 f{};
    for (int i = 0; i < 4; ++i) {
        const double lambda = std::max(ed.values[i], 0.0);
        const double root = std::sqrt(lambda);
        for (int j = 0; j < 4; ++j) {
            f[i][j] = root * ed.vectors[j][i];
        }
    }
    return f;
}

}  // namespace aicp
