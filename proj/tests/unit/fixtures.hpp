#pragma once

#include <cocycle/cocycle.hpp>

#include <random>
#include <vector>

namespace fixtures {

using cocycle::Matrix;
using cocycle::OneStepCocycle;

inline Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

inline Matrix scalar(double x) {
    Matrix m(1, 1);
    m << x;
    return m;
}

inline OneStepCocycle diag_pair() { return OneStepCocycle({mat2(4, 0, 0, 1), mat2(1, 0, 0, 4)}); }
inline OneStepCocycle scalar_pair() { return OneStepCocycle({scalar(2), scalar(0.5)}); }
inline OneStepCocycle typical_pair() { return OneStepCocycle({mat2(2, 0, 0, 0.5), mat2(1, 1, -1, 1)}); }
inline OneStepCocycle positive_pair() { return OneStepCocycle({mat2(2, 1, 1, 1), mat2(1, 1, 1, 2)}); }
inline OneStepCocycle inverse_pair() { return OneStepCocycle({mat2(2, 0, 0, 0.5), mat2(0.5, 0, 0, 2)}); }
inline OneStepCocycle shear_pair() { return OneStepCocycle({mat2(1, 1, 0, 1), mat2(0.5, 0, 0.3, 1.5)}); }

inline OneStepCocycle triple_3d() {
    Matrix a(3, 3), b(3, 3), c(3, 3);
    a << 2, 0.5, 0, 0, 1, 0.3, 0.1, 0, 0.5;
    b << 1, 0, 0.4, 0.6, 0.8, 0, 0, 0.2, 1.5;
    c << 0.7, 0.3, 0.2, 0, 1.2, 0.5, 0.4, 0, 0.9;
    return OneStepCocycle({a, b, c});
}

inline Matrix random_matrix(std::mt19937_64& rng, cocycle::Index d) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(d, d);
    for (cocycle::Index i = 0; i < d; ++i) {
        for (cocycle::Index j = 0; j < d; ++j) {
            m(i, j) = g(rng);
        }
    }
    return m;
}

inline cocycle::QVector random_q(std::mt19937_64& rng, cocycle::Index d, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    cocycle::QVector q = cocycle::QVector::zero(d);
    for (cocycle::Index i = 0; i < d; ++i) {
        q.values[i] = u(rng);
    }
    return q;
}

} // namespace fixtures
