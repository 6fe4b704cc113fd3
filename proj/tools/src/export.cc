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

#include "qmlsim/export.h"

#include <sstream>

#include "json.hpp"

namespace qmlsim::io {

using nlohmann::json;
using qml::format_number;

namespace {

std::string join_qubits(const std::vector<QubitIndex> &qs, char sep) {
    std::string out;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        if (i) {
            out += sep;
        }
        out += std::to_string(qs[i].value);
    }
    return out;
}

json job_summary(const qml::JobTree &job) {
    json j;
    j["type"] = std::string(qml::job_type_name(job.type));
    j["nqubits"] = job.n_qubits;
    j["steps"] = job.circuit.steps.size();
    if (job.options.seed) {
        j["seed"] = *job.options.seed;
    }
    j["job"] = qml::serialize_job(job);
    return j;
}

}  // namespace

std::string trace_to_json(const qml::JobTree &job, const Trace &trace) {
    json j;
    j["engine"] = trace.engine;
    j["rng"] = trace.rng;
    j["seed"] = trace.seed;
    j["threshold"] = trace.threshold;
    j["warnings"] = trace.warnings;
    j["job"] = job_summary(job);
    j["records"] = json::array();
    for (const StepRecord &r : trace.records) {
        json rec;
        rec["step"] = r.step;
        rec["entropy"] = r.entropy;
        rec["bloch"] = json::array();
        for (const BlochVector &b : r.bloch) {
            rec["bloch"].push_back({b[0], b[1], b[2]});
        }
        rec["listing"] = json::array();
        for (const BasisEntry &e : r.listing) {
            rec["listing"].push_back({{"index", e.index}, {"p", e.probability}, {"phase", e.phase}});
        }
        rec["measurements"] = json::array();
        for (const MeasurementRecord &m : r.measurements) {
            json targets = json::array();
            for (QubitIndex q : m.targets) {
                targets.push_back(q.value);
            }
            rec["measurements"].push_back(
                {{"targets", targets}, {"bits", m.bits()}, {"p", m.probability}, {"draw", m.rng_draw}});
        }
        j["records"].push_back(std::move(rec));
    }
    return j.dump(2) + "\n";
}

std::string spectrum_to_json(const qml::JobTree &job, const Spectrum &spectrum) {
    json j;
    j["method"] = spectrum.method;
    j["job"] = job_summary(job);
    j["eigenvalues"] = spectrum.eigenvalues;
    j["residuals"] = spectrum.residuals;
    j["converged"] = spectrum.converged;
    if (spectrum.method == "lanczos") {
        j["seed"] = spectrum.seed;
        j["iterations"] = spectrum.iterations;
    }
    return j.dump(2) + "\n";
}

std::string trace_to_csv(const Trace &trace) {
    std::ostringstream out;
    out << "kind,step,id,v1,v2,v3\n";
    for (const StepRecord &r : trace.records) {
        out << "entropy," << r.step << ",," << format_number(r.entropy) << ",,\n";
        for (std::size_t q = 0; q < r.bloch.size(); ++q) {
            out << "bloch," << r.step << ',' << q + 1 << ',' << format_number(r.bloch[q][0]) << ','
                << format_number(r.bloch[q][1]) << ',' << format_number(r.bloch[q][2]) << '\n';
        }
        for (const BasisEntry &e : r.listing) {
            out << "base," << r.step << ',' << e.index << ',' << format_number(e.probability) << ','
                << format_number(e.phase) << ",\n";
        }
        for (const MeasurementRecord &m : r.measurements) {
            out << "outcome," << r.step << ',' << join_qubits(m.targets, ' ') << ',' << m.bits() << ','
                << format_number(m.probability) << ",\n";
        }
    }
    return out.str();
}

std::string spectrum_to_csv(const Spectrum &spectrum) {
    std::ostringstream out;
    out << "index,eigenvalue,residual,converged\n";
    for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i) {
        out << i << ',' << format_number(spectrum.eigenvalues[i]) << ',' << format_number(spectrum.residuals[i])
            << ',' << (spectrum.converged[i] ? "true" : "false") << '\n';
    }
    return out.str();
}

std::string plan_to_text(const engine::EnginePlan &plan, std::uint64_t memory_cap) {
    std::ostringstream out;
    out << "engine: " << plan.engine_id << '\n';
    out << "memory: " << plan.memory_bytes << '\n';
    out << "memory_cap: " << memory_cap << '\n';
    out << "fits: " << (plan.memory_bytes <= memory_cap ? "yes" : "no") << '\n';
    out << "est_ops: " << plan.est_ops << '\n';
    out << "est_seconds: " << format_number(plan.est_seconds) << '\n';
    out << "workers: " << plan.workers << '\n';
    for (const std::string &w : plan.warnings) {
        out << "warning: " << w << '\n';
    }
    return out.str();
}

}  // namespace qmlsim::io
