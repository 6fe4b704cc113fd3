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

// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.h"
#include "oracles.h"
#include "qmlsim/engine.h"
#include "qmlsim/gates.h"
#include "qmlsim/hamiltonian.h"
#include "qmlsim/observables.h"
#include "qmlsim/qml.h"
#include "qmlsim/service.h"
#include "qmlsim/shor.h"
#include "qmlsim/solvers.h"
#include "random_jobs.h"

#include "json.hpp"

using namespace qmlsim;
namespace fs = std::filesystem;
using nlohmann::json;
using testing_support::read_text;
using testing_support::source_dir;
using testing_support::to_vec;

namespace {

/// Collects failed expectations for one criterion.
class Checker {
   public:
    void expect(bool ok, const std::string &what) {
        if (!ok) {
            failures_.push_back(what);
        }
    }
    void near(double got, double want, double tol, const std::string &what) {
        if (!(std::abs(got - want) <= tol)) {
            std::ostringstream s;
            s.precision(17);
            s << what << ": got " << got << ", want " << want << " +- " << tol;
            failures_.push_back(s.str());
        }
    }
    template <typename A, typename B>
    void equal(const A &got, const B &want, const std::string &what) {
        if (!(got == want)) {
            std::ostringstream s;
            s << what << ": got " << got << ", want " << want;
            failures_.push_back(s.str());
        }
    }
    const std::vector<std::string> &failures() const {
        return failures_;
    }

   private:
    std::vector<std::string> failures_;
};

struct Criterion {
    std::string name;
    double limit_seconds;
    std::function<void(Checker &)> body;
};

engine::RunOutcome run_job(const qml::JobTree &job, engine::Preference pref = engine::Preference::Auto,
                           int workers = 1) {
    engine::Limits limits;
    limits.preference = pref;
    limits.workers = workers;
    return engine::run(job, engine::configure(job, limits), limits);
}

double bloch_norm(const BlochVector &b) {
    return std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
}

void shor_classical(Checker &c) {
    c.equal(shor::modpow(11, 210, 899), 869u, "modpow(11,210,899)");
    c.equal(std::gcd(std::uint64_t{868}, std::uint64_t{899}), 31u, "gcd(868,899)");
    c.equal(std::gcd(std::uint64_t{870}, std::uint64_t{899}), 29u, "gcd(870,899)");
    const shor::FactorResult r = shor::extract_factors(954733, 20, 11, 899);
    c.expect(r.success, "extract_factors succeeds: " + r.reason);
    c.equal(r.p, 29u, "first factor");
    c.equal(r.q, 31u, "second factor");
    const auto terms = shor::continued_fraction(954733, 1048576).terms;
    const std::vector<std::uint64_t> digits = {10, 5, 1, 3, 9, 1, 6, 3};
    c.expect(std::search(terms.begin(), terms.end(), digits.begin(), digits.end()) != terms.end(),
             "expansion contains 10,5,1,3,9,1,6,3");
}

qml::JobTree shor9_job(std::uint64_t a) {
    std::string text = read_text(source_dir() / "samples" / "shor9.qml");
    const std::string from = "a=\"4\"";
    const auto pos = text.find(from);
    if (pos == std::string::npos) {
        throw std::runtime_error("shor9 sample lacks a=\"4\"");
    }
    text.replace(pos, from.size(), "a=\"" + std::to_string(a) + "\"");
    return qml::parse(text);
}

void shor_circuit(Checker &c) {
    const qml::JobTree job = shor9_job(4);
    std::size_t modulo_step = 0;
    for (std::size_t k = 0; k < job.circuit.steps.size(); ++k) {
        for (const GateSpec &g : job.circuit.steps[k].gates) {
            if (g.kind == GateKind::Modulo) {
                modulo_step = k;
            }
        }
    }
    const Trace trace = *run_job(job).trace;
    c.equal(trace.records.size(), job.circuit.steps.size(), "one record per step");
    c.near(trace.records.at(0).entropy, 6.0, 1e-9, "entropy after step 1");

    const StepRecord &post_modulo = trace.records.at(modulo_step);
    double smallest = 1.0;
    for (const BlochVector &b : post_modulo.bloch) {
        smallest = std::min(smallest, bloch_norm(b));
    }
    c.expect(smallest < 1.0 - 1e-3, "a=4: some qubit is entangled after MODULO");

    // a=5 has period 2, which entangles the x-register parity with y maximally.
    const Trace trace5 = *run_job(shor9_job(5)).trace;
    int vanishing = 0;
    for (const BlochVector &b : trace5.records.at(modulo_step).bloch) {
        vanishing += bloch_norm(b) < 1e-9;
    }
    c.expect(vanishing >= 2, "a=5: Bloch vectors vanish after MODULO");

    const auto &listing = trace.records.back().listing;
    c.expect(!listing.empty(), "final listing is not empty");
    if (!listing.empty()) {
        c.expect(listing.front().probability > 0.5, "final listing has a dominant state");
        bool tail = listing.size() > 1;
        for (std::size_t i = 1; i < listing.size(); ++i) {
            tail = tail && listing[i].probability < 0.01;
        }
        c.expect(tail, "final listing has a low-probability tail");
    }
}

void memory_model(Checker &c) {
    const qml::JobTree job = qml::parse_file(source_dir() / "samples" / "job31.qml");
    engine::Limits limits;
    limits.memory_cap = UINT64_MAX;
    c.equal(engine::configure(job, limits).memory_bytes, 34359738368u, "31-qubit memory estimate");
}

void engine_equivalence(Checker &c) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const qml::JobTree job = testing_support::random_circuit_job(6, 15, 50000 + seed);
        const auto s = run_job(job, engine::Preference::State);
        const auto m = run_job(job, engine::Preference::Matrix);
        c.equal(m.trace->engine, std::string("matrix-engine"), "matrix engine selected");
        worst = std::max(worst, testing_support::max_diff(to_vec(*s.final_state), to_vec(*m.final_state)));
    }
    c.expect(worst < 1e-10, "max amplitude difference " + std::to_string(worst));
}

void trotter_orders(Checker &c) {
    const PauliCouplingModel ising = ising_chain(2, 1.0, 1.0);
    const oracle::M h = build_dense(ising);
    oracle::V psi0 = oracle::V::Zero(4);
    psi0(0) = 1.0;
    const oracle::V exact = oracle::expm(Complex(0.0, -1.0) * h) * psi0;
    const std::vector<double> ns = {8, 16, 32, 64, 128};
    const int orders[] = {1, 2, 4};
    const double slopes[] = {-1.0, -2.0, -4.0};
    for (int o = 0; o < 3; ++o) {
        std::vector<double> errors;
        for (double n : ns) {
            StateVector s = StateVector::basis(2, 0);
            trotter_evolve(TrotterPlan{orders[o], 1.0, static_cast<int>(n), model_terms(ising)}, s);
            errors.push_back((to_vec(s) - exact).norm());
        }
        c.near(oracle::loglog_slope(ns, errors), slopes[o], 0.3, "order " + std::to_string(orders[o]) + " slope");
    }
}

void spectrum_crosscheck(Checker &c) {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PauliCouplingModel model = PauliCouplingModel::zeros(8);
    for (int i = 1; i <= 8; ++i) {
        for (int j = i + 1; j <= 8; ++j) {
            Eigen::Matrix3d e2;
            for (int k = 0; k < 9; ++k) {
                e2(k / 3, k % 3) = u(gen);
            }
            model.set_coupling(i, j, u(gen), e2);
        }
        model.set_field(i, Eigen::Vector3d(u(gen), u(gen), u(gen)));
    }
    const Matrix h = build_dense(model);
    const Spectrum dense = full_spectrum(h, false);
    LanczosOptions opt;
    opt.k = 3;
    const Spectrum margins = lanczos_margins(model_operator(model), 256, opt);
    const auto &ev = dense.eigenvalues;
    const std::vector<double> expected = {ev[0], ev[1], ev[2], ev[253], ev[254], ev[255]};
    for (std::size_t i = 0; i < 6; ++i) {
        c.near(margins.eigenvalues.at(i), expected[i], 1e-7, "margin " + std::to_string(i));
    }
    const double sum = std::accumulate(ev.begin(), ev.end(), 0.0);
    c.near(sum, h.trace().real(), 1e-9 * 256, "eigenvalue sum vs trace");
}

void observable_suite(Checker &c) {
    c.near(entropy(StateVector::basis(3, 5)), 0.0, 1e-9, "basis-state entropy");
    for (int m = 1; m <= 4; ++m) {
        StateVector s = StateVector::basis(4, 0);
        for (int q = 1; q <= m; ++q) {
            apply_gate(s, gate::single(GateKind::H, q));
        }
        c.near(entropy(s), m, 1e-9, "uniform entropy m=" + std::to_string(m));
    }
    StateVector bell = StateVector::basis(2, 0);
    apply_gate(bell, gate::single(GateKind::H, 1));
    apply_gate(bell, gate::controlled(GateKind::CNOT, {1}, {2}));
    c.near(entropy(bell), 1.0, 1e-9, "Bell entropy");

    const BlochVector zero = bloch_vector(StateVector::basis(1, 0), QubitIndex{1});
    StateVector plus_state = StateVector::basis(1, 0);
    apply_gate(plus_state, gate::single(GateKind::H, 1));
    const BlochVector plus = bloch_vector(plus_state, QubitIndex{1});
    const BlochVector want_zero = {0, 0, 1};
    const BlochVector want_plus = {1, 0, 0};
    for (int a = 0; a < 3; ++a) {
        c.near(zero[a], want_zero[a], 1e-9, "Bloch |0>");
        c.near(plus[a], want_plus[a], 1e-9, "Bloch |+>");
        c.near(bloch_vector(bell, QubitIndex{1})[a], 0.0, 1e-9, "Bloch Bell qubit 1");
        c.near(bloch_vector(bell, QubitIndex{2})[a], 0.0, 1e-9, "Bloch Bell qubit 2");
    }
}

double grover_success(int m, std::uint64_t marked, int iterations) {
    StateVector s = StateVector::basis(m, 0);
    std::vector<int> reg(m);
    std::iota(reg.begin(), reg.end(), 1);
    for (int q : reg) {
        apply_gate(s, gate::single(GateKind::H, q));
    }
    apply_gate(s, gate::grover(reg, {marked}, iterations));
    return std::norm(s[marked]);
}

void grover(Checker &c) {
    c.near(grover_success(2, 2, 1), 1.0, 1e-12, "2 qubits, 1 iteration");
    c.near(grover_success(2, 2, 1), oracle::grover_probability(2, 1, 1), 1e-12, "2-qubit closed form");
    c.near(grover_success(3, 5, 2), 0.9453, 1e-4, "3 qubits, 2 iterations");
    c.near(grover_success(3, 5, 2), oracle::grover_probability(3, 1, 2), 1e-12, "3-qubit closed form");
}

void determinism(Checker &c) {
    std::vector<qml::JobTree> jobs = {qml::parse_file(source_dir() / "samples" / "shor9.qml")};
    qml::JobTree random_job = testing_support::random_circuit_job(12, 40, 4242);
    random_job.circuit.steps.push_back(TimeStep{{gate::measure({1, 5, 9})}});
    random_job.circuit.steps.push_back(TimeStep{{gate::qft({2, 3, 4, 6, 7, 8, 10, 11, 12})}});
    random_job.circuit.steps.push_back(TimeStep{{gate::measure({2, 3})}});
    jobs.push_back(random_job);
    for (const qml::JobTree &job : jobs) {
        const std::string first = qml::serialize_result(job, *run_job(job, engine::Preference::State, 1).trace);
        const std::string second = qml::serialize_result(job, *run_job(job, engine::Preference::State, 1).trace);
        const std::string four = qml::serialize_result(job, *run_job(job, engine::Preference::State, 4).trace);
        c.expect(first == second, "two runs are byte-identical");
        c.expect(first == four, "1 and 4 workers are byte-identical");
    }
}

void qml_corpus(Checker &c) {
    const fs::path root = source_dir() / "tests" / "data" / "qml";
    auto docs = [&](const char *kind) {
        std::vector<fs::path> out;
        for (const auto &e : fs::directory_iterator(root / kind)) {
            if (e.path().extension() == ".qml") {
                out.push_back(e.path());
            }
        }
        return out;
    };
    const auto valid = docs("valid");
    const auto invalid = docs("invalid");
    c.expect(valid.size() >= 20, "at least 20 valid documents");
    c.expect(invalid.size() >= 15, "at least 15 invalid documents");
    for (const fs::path &p : valid) {
        try {
            const qml::JobTree job = qml::parse_file(p);
            const std::string text = qml::serialize_job(job);
            const qml::JobTree again = qml::parse(text);
            c.expect(again == job && qml::serialize_job(again) == text, "round trip " + p.filename().string());
        } catch (const std::exception &e) {
            c.expect(false, p.filename().string() + ": " + e.what());
        }
    }
    for (const fs::path &p : invalid) {
        const auto diags = qml::validate(read_text(p), p);
        bool located = !diags.empty();
        for (const auto &d : diags) {
            located = located && d.line >= 1 && d.column >= 1;
        }
        c.expect(located, "located diagnostics for " + p.filename().string());
    }
    c.expect(qml::parse_file(root / "valid" / "include_bell.qml") ==
                 qml::parse_file(root / "valid" / "include_bell_inlined.qml"),
             "include equals inlined document");
    c.expect(qml::parse_file(root / "valid" / "include_nested.qml") ==
                 qml::parse_file(root / "valid" / "include_nested_inlined.qml"),
             "nested include equals inlined document");
}

void service_lifecycle(Checker &c) {
    const fs::path dir = fs::temp_directory_path() / ("qmlsim-acceptance-" + std::to_string(std::random_device{}()));
    fs::remove_all(dir);
    const std::string bell = read_text(source_dir() / "samples" / "bell.qml");
    const std::string big = read_text(source_dir() / "samples" / "job31.qml");
    auto config = [&](int workers) {
        service::Config cfg;
        cfg.data_dir = dir;
        cfg.workers = workers;
        cfg.limits.memory_cap = std::uint64_t{4} << 30;
        return cfg;
    };
    std::string done_id;
    std::string done_result;
    std::string queued_id;
    {
        service::Service s(config(1));
        const auto submitted = s.handle("POST", "/jobs", bell);
        c.equal(submitted.status, 202, "submit status");
        done_id = json::parse(submitted.body).at("id");
        s.wait_idle();
        c.equal(json::parse(s.handle("GET", "/jobs/" + done_id, "").body).at("status").get<std::string>(),
                std::string("done"), "job status");
        const auto result = s.handle("GET", "/jobs/" + done_id + "/result", "");
        c.equal(result.status, 200, "result status");
        done_result = result.body;
        c.expect(qml::parse_result(done_result).trace.has_value(), "result parses to a trace");
        c.equal(s.handle("POST", "/jobs", "<qml").status, 400, "malformed submission");
        const auto too_big = s.handle("POST", "/jobs", big);
        c.equal(too_big.status, 413, "oversized job");
        c.expect(too_big.body.find("34359738368") != std::string::npos, "413 carries the estimate");
        c.equal(s.handle("GET", "/jobs/00000000000000000000000000000000", "").status, 404, "unknown id");
    }
    {
        service::Service s(config(0));
        queued_id = json::parse(s.handle("POST", "/jobs", bell).body).at("id");
        c.equal(s.handle("GET", "/jobs/" + queued_id + "/result", "").status, 409, "result of queued job");
    }
    {
        service::Service s(config(1));
        c.equal(s.handle("GET", "/jobs/" + done_id + "/result", "").body, done_result, "done result survives restart");
        s.wait_idle();
        c.equal(json::parse(s.handle("GET", "/jobs/" + queued_id, "").body).at("status").get<std::string>(),
                std::string("done"), "queued job runs after restart");
    }
    fs::remove_all(dir);
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"shor-899 classical pipeline", 1, shor_classical},
        {"9-qubit shor circuit", 10, shor_circuit},
        {"memory model 31 qubits", 1, memory_model},
        {"engine equivalence 50 random 6-qubit jobs", 60, engine_equivalence},
        {"trotter orders 1 2 4", 30, trotter_orders},
        {"spectrum cross-check 8 qubits", 60, spectrum_crosscheck},
        {"observable suite", 1, observable_suite},
        {"grover success probabilities", 1, grover},
        {"determinism across runs and workers", 60, determinism},
        {"qml corpus", 30, qml_corpus},
        {"service lifecycle and restart", 30, service_lifecycle},
    };
    int failed = 0;
    for (const Criterion &cr : criteria) {
        Checker c;
        const auto start = std::chrono::steady_clock::now();
        try {
            cr.body(c);
        } catch (const std::exception &e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > cr.limit_seconds) {
            c.expect(false, "took " + std::to_string(secs) + " s, limit " + std::to_string(cr.limit_seconds) + " s");
        }
        std::ostringstream timing;
        timing.precision(3);
        timing << std::fixed << secs;
        if (c.failures().empty()) {
            std::cout << "PASS " << cr.name << " (" << timing.str() << " s)\n";
        } else {
            ++failed;
            std::cout << "FAIL " << cr.name << " (" << timing.str() << " s):";
            for (const std::string &f : c.failures()) {
                std::cout << " [" << f << "]";
            }
            std::cout << "\n";
        }
    }
    return failed == 0 ? 0 : 1;
}
