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

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qmlsim/engine.h"
#include "qmlsim/export.h"
#include "qmlsim/service.h"
#include "qmlsim/shor.h"

// After Eigen: <resolv.h> defines a _res macro that clashes with Eigen internals.
#include "httplib.h"

namespace {

using namespace qmlsim;
namespace fs = std::filesystem;

constexpr int kExitInput = 1;
constexpr int kExitResource = 2;
constexpr int kExitNumeric = 3;

int exit_code(const Error &e) {
    switch (e.category()) {
        case Error::Category::Input:
            return kExitInput;
        case Error::Category::Resource:
            return kExitResource;
        case Error::Category::Numeric:
            return kExitNumeric;
    }
    return kExitInput;
}

std::string fetch_http(const std::string &url) {
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end + 3);
    if (url.rfind("http://", 0) != 0) {
        throw std::runtime_error("only http:// includes are supported");
    }
    httplib::Client client(url.substr(0, path_start));
    auto res = client.Get(path_start == std::string::npos ? "/" : url.substr(path_start));
    if (!res || res->status != 200) {
        throw std::runtime_error(res ? "HTTP " + std::to_string(res->status) : "connection failed");
    }
    return res->body;
}

struct CommonOptions {
    std::string include_root;
    bool allow_remote = false;
    std::uint64_t memory_cap = default_memory_cap();
    int workers = 1;
};

qml::ParseOptions parse_options(const CommonOptions &common) {
    qml::ParseOptions po;
    if (!common.include_root.empty()) {
        po.include_root = common.include_root;
    }
    po.allow_remote = common.allow_remote;
    if (common.allow_remote) {
        po.fetch = fetch_http;
    }
    return po;
}

engine::Limits limits_from(const CommonOptions &common) {
    engine::Limits limits;
    limits.memory_cap = common.memory_cap;
    limits.workers = common.workers;
    return limits;
}

void write_output(const std::string &path, const std::string &text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        throw InputError("cannot write " + path);
    }
}

std::string join_numbers(const std::vector<double> &values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) {
            out += ", ";
        }
        out += qml::format_number(values[i]);
    }
    return out;
}

void print_diagnostics(const std::vector<qml::Diagnostic> &diags, const std::string &path) {
    for (const auto &d : diags) {
        std::cerr << (d.file.empty() ? path : d.file) << ":" << d.line << ":" << d.column << ": " << d.message
                  << "\n";
    }
}

int cmd_run(const CommonOptions &common, const std::string &job_path, std::optional<std::uint64_t> seed,
            const std::string &out, const std::string &format, const std::string &engine_name,
            std::optional<double> threshold, bool quiet) {
    qml::JobTree job = qml::parse_file(job_path, parse_options(common));
    if (threshold) {
        if (!(*threshold >= 0.0 && *threshold < 1.0)) {
            throw InputError("threshold must be in [0, 1)");
        }
        job.options.threshold = *threshold;
    }
    engine::Limits limits = limits_from(common);
    limits.preference = engine_name == "state"    ? engine::Preference::State
                        : engine_name == "matrix" ? engine::Preference::Matrix
                                                  : engine::Preference::Auto;
    const engine::EnginePlan plan = engine::configure(job, limits);
    engine::RunOptions options;
    options.seed = seed;
    if (!quiet) {
        options.progress = [](const StepRecord &r, std::size_t total) {
            std::cerr << "step " << r.step << "/" << total << " entropy " << qml::format_number(r.entropy) << "\n";
        };
    }
    const engine::RunOutcome outcome = engine::run(job, plan, limits, options);
    std::string text;
    if (outcome.trace) {
        text = format == "json"  ? io::trace_to_json(job, *outcome.trace)
               : format == "csv" ? io::trace_to_csv(*outcome.trace)
                                 : qml::serialize_result(job, *outcome.trace);
    } else {
        text = format == "json"  ? io::spectrum_to_json(job, *outcome.spectrum)
               : format == "csv" ? io::spectrum_to_csv(*outcome.spectrum)
                                 : qml::serialize_result(job, *outcome.spectrum);
    }
    write_output(out, text);
    return 0;
}

int cmd_estimate(const CommonOptions &common, const std::string &job_path) {
    const qml::JobTree job = qml::parse_file(job_path, parse_options(common));
    engine::Limits limits = limits_from(common);
    limits.ops_per_second = engine::calibrate_throughput();
    engine::Limits unlimited = limits;
    unlimited.memory_cap = UINT64_MAX;
    const engine::EnginePlan plan = engine::configure(job, unlimited);
    std::cout << io::plan_to_text(plan, limits.memory_cap);
    return 0;
}

int cmd_validate(const CommonOptions &common, const std::string &job_path) {
    std::ifstream in(job_path, std::ios::binary);
    if (!in) {
        throw InputError("cannot read " + job_path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto diags = qml::validate(ss.str(), job_path, parse_options(common));
    if (diags.empty()) {
        std::cout << "valid\n";
        return 0;
    }
    print_diagnostics(diags, job_path);
    std::cout << "invalid: " << diags.size() << " diagnostic(s)\n";
    return kExitInput;
}

int cmd_spectrum(const CommonOptions &common, const std::string &path, bool full, int margins,
                 const std::string &ham_name, std::optional<std::uint64_t> seed) {
    qml::JobTree job = qml::parse_file(path, parse_options(common));
    std::string name = ham_name;
    if (name.empty()) {
        name = !job.spectrum_hamiltonian.empty() ? job.spectrum_hamiltonian
               : job.hamiltonians.size() == 1   ? job.hamiltonians.begin()->first
                                                : std::string();
    }
    auto it = job.hamiltonians.find(name);
    if (it == job.hamiltonians.end()) {
        throw InputError(name.empty() ? "document defines several hamiltonians; pick one with --ham"
                                      : "unknown hamiltonian '" + name + "'");
    }
    job.spectrum_hamiltonian = name;
    job.n_qubits = it->second.n_qubits;
    job.circuit = Circuit{job.n_qubits, {}};
    // Without --full or --margins a spectrum document keeps its own kind.
    if (full) {
        job.type = qml::JobType::SpectrumFull;
    } else if (margins > 0) {
        job.type = qml::JobType::SpectrumMargins;
        job.options.margins_k = margins;
    } else if (job.type == qml::JobType::Circuit) {
        throw InputError("spectrum of a circuit document needs --full or --margins k");
    }
    const engine::Limits limits = limits_from(common);
    const engine::EnginePlan plan = engine::configure(job, limits);
    engine::RunOptions options;
    options.seed = seed;
    const Spectrum s = *engine::run(job, plan, limits, options).spectrum;
    std::cout << "method: " << s.method << "\n";
    std::cout << "eigenvalues: " << join_numbers(s.eigenvalues) << "\n";
    std::cout << "residuals: " << join_numbers(s.residuals) << "\n";
    bool all = true;
    for (bool c : s.converged) {
        all = all && c;
    }
    std::cout << "converged: " << (all ? "true" : "false") << "\n";
    if (s.method == "lanczos") {
        std::cout << "seed: " << s.seed << "\n";
        std::cout << "iterations: " << s.iterations << "\n";
    }
    return all ? 0 : kExitNumeric;
}

int cmd_shor(std::uint64_t measured, int nx, std::uint64_t a, std::uint64_t n, int bound) {
    const shor::FactorResult r = shor::extract_factors(measured, nx, a, n, bound);
    std::cout << "method: " << r.method << "\n";
    if (r.order) {
        std::cout << "order: " << r.order << "\n";
        std::cout << "denominator: " << r.denominator << "\n";
        std::cout << "half_power: " << r.half_power << "\n";
    }
    if (!r.success) {
        std::cout << "factors: none\n";
        std::cout << "reason: " << r.reason << "\n";
        std::cout << "candidates:";
        for (auto c : r.candidates) {
            std::cout << " " << c;
        }
        std::cout << "\n";
        return kExitNumeric;
    }
    std::cout << "factors: " << r.p << " " << r.q << "\n";
    return 0;
}

service::Service *g_service = nullptr;

void on_signal(int) {
    if (g_service) {
        std::thread([] { g_service->stop(); }).detach();
    }
}

int cmd_serve(const CommonOptions &common, const std::string &host, int port, const std::string &data_dir,
              int job_workers) {
    service::Config config;
    config.host = host;
    config.port = port;
    config.data_dir = data_dir;
    config.workers = job_workers;
    config.limits = limits_from(common);
    config.parse = parse_options(common);
    service::Service svc(config);
    g_service = &svc;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    svc.serve_forever([&](int bound) {
        std::cerr << "listening on " << host << ":" << bound << " data " << data_dir << "\n";
    });
    g_service = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"qmlsim: quantum circuit and spin Hamiltonian simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    CommonOptions common;
    app.add_option("--include-root", common.include_root, "Sandbox root for <include> hrefs");
    app.add_flag("--allow-remote", common.allow_remote, "Follow http:// include hrefs");
    app.add_option("--memory-cap", common.memory_cap, "Memory limit in bytes (default QMLSIM_MEMORY_CAP or 4 GiB)");
    app.add_option("--workers", common.workers, "Kernel worker threads")->check(CLI::Range(1, 256));

    std::string job_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "qml";
    std::string engine_name = "auto";
    std::optional<double> threshold;
    bool quiet = false;
    auto *run = app.add_subcommand("run", "Run a job and write its result");
    run->add_option("job", job_path, "QML job file")->required();
    run->add_option("--seed", seed, "Measurement seed (overrides the job)");
    run->add_option("--out,-o", out, "Output file (default stdout)");
    run->add_option("--format", format)->check(CLI::IsMember({"qml", "json", "csv"}));
    run->add_option("--engine", engine_name)->check(CLI::IsMember({"auto", "state", "matrix"}));
    run->add_option("--threshold", threshold, "Listing probability threshold");
    run->add_flag("--quiet,-q", quiet, "No per-step progress");

    auto *estimate = app.add_subcommand("estimate", "Print the engine plan");
    estimate->add_option("job", job_path)->required();

    auto *validate = app.add_subcommand("validate", "Print diagnostics");
    validate->add_option("job", job_path)->required();

    bool full = false;
    int margins = 0;
    std::string ham_name;
    auto *spectrum = app.add_subcommand("spectrum", "Eigenvalues of a Hamiltonian");
    spectrum->add_option("file", job_path, "QML document defining the Hamiltonian")->required();
    auto *full_flag = spectrum->add_flag("--full", full, "All eigenvalues (dense)");
    auto *margins_opt = spectrum->add_option("--margins", margins, "k lowest and k highest (Lanczos)")
                            ->check(CLI::PositiveNumber);
    full_flag->excludes(margins_opt);
    spectrum->add_option("--ham", ham_name, "Hamiltonian name");
    spectrum->add_option("--seed", seed, "Lanczos start-vector seed");

    std::uint64_t m_value = 0;
    int nx = 0;
    std::uint64_t a_value = 0;
    std::uint64_t n_value = 0;
    int bound = 64;
    auto *shor_cmd = app.add_subcommand("shor", "Factors from a period-finding outcome");
    shor_cmd->add_option("--M", m_value, "Measured x-register value")->required();
    shor_cmd->add_option("--nx", nx, "x-register width")->required()->check(CLI::Range(1, 62));
    shor_cmd->add_option("--a", a_value, "Base")->required();
    shor_cmd->add_option("--N", n_value, "Number to factor")->required();
    shor_cmd->add_option("--bound", bound, "Largest multiple of each denominator tried")->check(CLI::PositiveNumber);

    std::string host = "127.0.0.1";
    int port = 8080;
    std::string data_dir = "qmlsim-data";
    int job_workers = 1;
    auto *serve = app.add_subcommand("serve", "Job submission HTTP service");
    serve->add_option("--host", host);
    serve->add_option("--port", port)->check(CLI::Range(0, 65535));
    serve->add_option("--data-dir", data_dir);
    serve->add_option("--job-workers", job_workers, "Concurrent jobs")->check(CLI::Range(0, 64));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            return cmd_run(common, job_path, seed, out, format, engine_name, threshold, quiet);
        }
        if (*estimate) {
            return cmd_estimate(common, job_path);
        }
        if (*validate) {
            return cmd_validate(common, job_path);
        }
        if (*spectrum) {
            return cmd_spectrum(common, job_path, full, margins, ham_name, seed);
        }
        if (*shor_cmd) {
            return cmd_shor(m_value, nx, a_value, n_value, bound);
        }
        if (*serve) {
            return cmd_serve(common, host, port, data_dir, job_workers);
        }
    } catch (const qml::QmlError &e) {
        print_diagnostics(e.diagnostics(), job_path);
        return kExitInput;
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return 0;
}
