// Copyright 2026 The qmlsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qmlsim/solvers.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>

#include "qmlsim/errors.h"

namespace qmlsim {

namespace {

using Vector = Eigen::VectorXcd;

double uniform_signed(std::mt19937_64 &gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

Vector random_unit_vector(std::mt19937_64 &gen, std::size_t dim) {
    Vector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double re = uniform_signed(gen);
        const double im = uniform_signed(gen);
        v(i) = Complex(re, im);
    }
    v.normalize();
    return v;
}

// Two passes of classical Gram-Schmidt against the basis.
void orthogonalize(Vector &w, const std::vector<Vector> &basis) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const Vector &v : basis) {
            w -= v * v.dot(w);
        }
    }
}

void apply(const LinearOperator &op, const Vector &x, Vector &y) {
    y.resize(x.size());
    op(std::span<const Complex>(x.data(), static_cast<std::size_t>(x.size())),
       std::span<Complex>(y.data(), static_cast<std::size_t>(y.size())));
}

}  // namespace

Spectrum full_spectrum(const Matrix &hamiltonian, bool want_vectors, int dense_cap) {
    if (hamiltonian.rows() != hamiltonian.cols() || hamiltonian.rows() == 0) {
        throw InputError("full_spectrum needs a non-empty square matrix");
    }
    if (hamiltonian.rows() > (Eigen::Index{1} << dense_cap)) {
        throw ResourceError("matrix of dimension " + std::to_string(hamiltonian.rows()) +
                            " exceeds the dense cap of " + std::to_string(dense_cap) +
                            " qubits; use the margins solver");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(hamiltonian, Eigen::ComputeEigenvectors);
    if (eig.info() != Eigen::Success) {
        throw NumericError("dense eigensolver did not converge");
    }
    Spectrum out;
    out.method = "dense";
    const auto n = eig.eigenvalues().size();
    out.eigenvalues.resize(static_cast<std::size_t>(n));
    out.residuals.resize(static_cast<std::size_t>(n));
    out.converged.assign(static_cast<std::size_t>(n), true);
    const Matrix hv = hamiltonian * eig.eigenvectors();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lambda = eig.eigenvalues()(i);
        out.eigenvalues[static_cast<std::size_t>(i)] = lambda;
        out.residuals[static_cast<std::size_t>(i)] = (hv.col(i) - lambda * eig.eigenvectors().col(i)).norm();
    }
    if (want_vectors) {
        out.eigenvectors = eig.eigenvectors();
    }
    return out;
}

namespace {

struct RitzPair {
    double value = 0.0;
    Vector vector;
};

// One Lanczos run started from a random vector orthogonal to `locked`, with
// full reorthogonalization against both the Krylov basis and `locked`.
// Returns the `low` smallest and `high` largest Ritz pairs of the complement.
std::vector<RitzPair> lanczos_block(const LinearOperator &op, std::size_t dim, std::size_t low, std::size_t high,
                                    const LanczosOptions &options, std::mt19937_64 &gen,
                                    const std::vector<Vector> &locked, int &iterations) {
    const std::size_t wanted = low + high;
    const std::size_t room = dim - locked.size();
    const std::size_t max_steps = std::min<std::size_t>(static_cast<std::size_t>(options.max_iter), room);

    std::vector<Vector> basis;
    std::vector<double> alpha;
    std::vector<double> beta;  // beta[j] couples basis j and j+1
    auto fresh_start = [&]() {
        Vector v = random_unit_vector(gen, dim);
        orthogonalize(v, locked);
        orthogonalize(v, basis);
        v.normalize();
        return v;
    };
    basis.push_back(fresh_start());

    Eigen::VectorXd ritz_values;
    Eigen::MatrixXd ritz_vectors;
    std::vector<Eigen::Index> selected;
    auto solve_tridiagonal = [&]() {
        const auto m = static_cast<Eigen::Index>(alpha.size());
        Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
        Eigen::VectorXd sub = Eigen::VectorXd::Zero(std::max<Eigen::Index>(m - 1, 0));
        for (Eigen::Index i = 0; i + 1 < m; ++i) {
            sub(i) = beta[static_cast<std::size_t>(i)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
        tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        ritz_values = tri.eigenvalues();
        ritz_vectors = tri.eigenvectors();
        selected.clear();
        for (std::size_t i = 0; i < low; ++i) {
            selected.push_back(static_cast<Eigen::Index>(i));
        }
        for (std::size_t i = 0; i < high; ++i) {
            selected.push_back(m - static_cast<Eigen::Index>(high) + static_cast<Eigen::Index>(i));
        }
    };

    Vector w;
    double scale = 0.0;
    for (std::size_t j = 0; j < max_steps; ++j) {
        ++iterations;
        apply(op, basis[j], w);
        const double a = basis[j].dot(w).real();
        alpha.push_back(a);
        scale = std::max(scale, std::abs(a));
        w -= a * basis[j];
        if (j > 0) {
            w -= beta[j - 1] * basis[j - 1];
        }
        orthogonalize(w, locked);
        orthogonalize(w, basis);
        const double b = w.norm();
        scale = std::max(scale, b);
        const bool exhausted = b <= 1e-12 * std::max(scale, 1.0);

        if (alpha.size() >= wanted) {
            solve_tridiagonal();
            const Eigen::Index last = static_cast<Eigen::Index>(alpha.size()) - 1;
            const double coupling = exhausted ? 0.0 : b;
            const bool converged = std::all_of(selected.begin(), selected.end(), [&](Eigen::Index i) {
                return std::abs(coupling * ritz_vectors(last, i)) < options.tol;
            });
            if (converged) {
                break;
            }
        }
        if (j + 1 == max_steps) {
            break;
        }
        if (exhausted) {
            // Invariant subspace found: continue in its orthogonal complement.
            beta.push_back(0.0);
            basis.push_back(fresh_start());
        } else {
            beta.push_back(b);
            basis.push_back(w / b);
        }
    }
    if (alpha.size() < wanted) {
        throw NumericError("Lanczos produced fewer Ritz values than requested");
    }
    solve_tridiagonal();

    std::vector<RitzPair> out;
    for (Eigen::Index idx : selected) {
        Vector y = Vector::Zero(static_cast<Eigen::Index>(dim));
        for (std::size_t b = 0; b < alpha.size(); ++b) {
            y += ritz_vectors(static_cast<Eigen::Index>(b), idx) * basis[b];
        }
        y.normalize();
        out.push_back(RitzPair{ritz_values(idx), std::move(y)});
    }
    return out;
}

}  // namespace

Spectrum lanczos_margins(const LinearOperator &op, std::size_t dim, const LanczosOptions &options) {
    const int k = options.k;
    if (k < 1) {
        throw InputError("k must be >= 1");
    }
    if (dim == 0 || static_cast<std::size_t>(2 * k) > dim) {
        throw InputError("k too large: " + std::to_string(k) + " margins requested for dimension " +
                         std::to_string(dim));
    }
    if (options.max_iter < k) {
        throw InputError("max_iter must be >= k");
    }
    if (!(options.tol > 0.0)) {
        throw InputError("tolerance must be positive");
    }
    const auto kk = static_cast<std::size_t>(k);
    const std::size_t wanted = 2 * kk;

    // Krylov methods see one copy of each eigenvalue per start vector. The
    // current margin Ritz vectors are therefore locked and a new block is run
    // in their complement; the margins are final once a block leaves them
    // unchanged.
    std::mt19937_64 gen(options.seed);
    int iterations = 0;
    std::vector<RitzPair> margins = lanczos_block(op, dim, kk, kk, options, gen, {}, iterations);
    for (std::size_t pass = 0; pass < wanted && margins.size() + wanted <= dim; ++pass) {
        std::vector<Vector> locked;
        for (const RitzPair &r : margins) {
            locked.push_back(r.vector);
        }
        std::vector<RitzPair> extra = lanczos_block(op, dim, kk, kk, options, gen, locked, iterations);
        std::vector<RitzPair> pool = margins;
        for (RitzPair &r : extra) {
            pool.push_back(std::move(r));
        }
        std::stable_sort(pool.begin(), pool.end(),
                         [](const RitzPair &a, const RitzPair &b) { return a.value < b.value; });
        std::vector<RitzPair> next(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(kk));
        next.insert(next.end(), pool.end() - static_cast<std::ptrdiff_t>(kk), pool.end());
        const bool unchanged = std::equal(next.begin(), next.end(), margins.begin(), [&](const auto &a, const auto &b) {
            return std::abs(a.value - b.value) < options.tol;
        });
        margins = std::move(next);
        if (unchanged) {
            break;
        }
    }

    Spectrum out;
    out.method = "lanczos";
    out.seed = options.seed;
    out.iterations = iterations;
    Vector hy;
    for (const RitzPair &r : margins) {
        apply(op, r.vector, hy);
        const double residual = (hy - r.value * r.vector).norm();
        out.eigenvalues.push_back(r.value);
        out.residuals.push_back(residual);
        out.converged.push_back(residual < options.tol);
    }
    return out;
}

LinearOperator model_operator(const PauliCouplingModel &model) {
    auto terms = std::make_shared<std::vector<PauliTerm>>(model_terms(model));
    return [terms](std::span<const Complex> x, std::span<Complex> y) {
        StateVector in = StateVector::from_amplitudes(std::vector<Complex>(x.begin(), x.end()));
        StateVector out = StateVector::from_amplitudes(std::vector<Complex>(x.size()));
        apply_terms(*terms, in, out);
        std::copy(out.amplitudes().begin(), out.amplitudes().end(), y.begin());
    };
}

}  // namespace qmlsim
