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

#include "qmlsim/qml.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "qmlsim/xml.h"

namespace qmlsim::qml {

namespace fs = std::filesystem;
using xml::Element;
using xml::Location;

namespace {

constexpr std::string_view kVersion = "1.0";

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, std::string_view separators) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t end = s.find_first_of(separators, start);
        const std::string piece = trim(s.substr(start, end == std::string_view::npos ? end : end - start));
        if (!piece.empty()) {
            out.push_back(piece);
        }
        if (end == std::string_view::npos) {
            break;
        }
        start = end + 1;
    }
    return out;
}

template <typename T>
std::optional<T> to_number(std::string_view s) {
    const std::string t = trim(s);
    T value{};
    const char *first = t.data();
    const char *last = t.data() + t.size();
    if (!t.empty() && t[0] == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || first == last) {
        return std::nullopt;
    }
    return value;
}

std::string join_qubits(const std::vector<QubitIndex> &q) {
    std::string out;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (i) {
            out += ',';
        }
        out += std::to_string(q[i].value);
    }
    return out;
}

bool is_remote(std::string_view href) {
    return href.starts_with("http://") || href.starts_with("https://");
}

bool path_within(const fs::path &candidate, const fs::path &root) {
    auto c = candidate.begin();
    for (auto r = root.begin(); r != root.end(); ++r, ++c) {
        if (r->empty()) {
            continue;
        }
        if (c == candidate.end() || *c != *r) {
            return false;
        }
    }
    return true;
}

struct GateSite {
    Location location;
    std::string file;
};

struct StepSite {
    Location location;
    std::string file;
    std::vector<GateSite> gates;
};

struct BuiltJob {
    JobTree job;
    std::vector<StepSite> sites;  // parallel to job.circuit.steps
    Location location;
    std::string ham_attr;
};

class Builder {
   public:
    Builder(const ParseOptions &options, fs::path root, std::vector<Diagnostic> &diags)
        : options_(options), root_(std::move(root)), diags_(diags) {
    }

    /// Parses text of one document. Returns nullopt after reporting when the
    /// document cannot be turned into a job.
    std::optional<BuiltJob> document(std::string_view text, const std::string &file, const fs::path &base_dir,
                                     std::vector<std::string> &stack) {
        Element root;
        try {
            root = xml::parse(text);
        } catch (const xml::SyntaxError &e) {
            report(file, e.location(), std::string("syntax error: ") + e.what());
            return std::nullopt;
        }
        const Element *job_el = qml_root(root, file, "job");
        if (!job_el) {
            return std::nullopt;
        }
        return job(*job_el, file, base_dir, stack, true);
    }

    const Element *qml_root(const Element &root, const std::string &file, std::string_view child_name) {
        if (root.name != "qml") {
            report(file, root.location, "root element must be <qml>, found <" + root.name + ">");
            return nullptr;
        }
        check_attributes(root, file, {"version"});
        const auto *version = root.find("version");
        if (!version) {
            report(file, root.location, "missing attribute 'version' on <qml>");
        } else if (version->value != kVersion) {
            report(file, version->location, "unsupported QML version '" + version->value + "'");
        }
        const Element *found = nullptr;
        for (const Element &child : root.children) {
            if (child.name == child_name && !found) {
                found = &child;
            } else {
                report(file, child.location, "unexpected element <" + child.name + "> in <qml>");
            }
        }
        if (!found) {
            report(file, root.location, "missing <" + std::string(child_name) + "> element");
        }
        return found;
    }

    std::optional<BuiltJob> job(const Element &el, const std::string &file, const fs::path &base_dir,
                                std::vector<std::string> &stack, bool resolve_includes) {
        check_attributes(el, file, {"type", "nqubits", "seed", "threshold", "initial", "ham", "k", "maxiter", "tol"});
        BuiltJob built;
        built.location = el.location;
        JobTree &job = built.job;
        bool ok = true;

        const auto *type = el.find("type");
        if (!type) {
            report(file, el.location, "missing attribute 'type' on <job>");
            ok = false;
        } else if (type->value == "circuit") {
            job.type = JobType::Circuit;
        } else if (type->value == "spectrum-full") {
            job.type = JobType::SpectrumFull;
        } else if (type->value == "spectrum-margins") {
            job.type = JobType::SpectrumMargins;
        } else {
            report(file, type->location, "unknown job type '" + type->value + "'");
            ok = false;
        }
        const auto n = required_int(el, "nqubits", file);
        if (!n) {
            ok = false;
        } else if (*n < 1 || *n > kMaxQubits) {
            report(file, el.find("nqubits")->location,
                   "nqubits must be in 1.." + std::to_string(kMaxQubits) + ", got " + std::to_string(*n));
            ok = false;
        } else {
            job.n_qubits = static_cast<int>(*n);
        }
        job.circuit.n_qubits = job.n_qubits;
        if (const auto *a = el.find("seed")) {
            if (auto v = to_number<std::uint64_t>(a->value)) {
                job.options.seed = *v;
            } else {
                report(file, a->location, "seed must be an unsigned 64-bit integer");
            }
        }
        if (const auto *a = el.find("threshold")) {
            auto v = to_number<double>(a->value);
            if (!v || !(*v >= 0.0 && *v < 1.0)) {
                report(file, a->location, "threshold must be a number in [0, 1)");
            } else {
                job.options.threshold = *v;
            }
        }
        if (const auto *a = el.find("initial")) {
            auto v = to_number<std::uint64_t>(a->value);
            if (!v || (job.n_qubits > 0 && *v >= (std::uint64_t{1} << job.n_qubits))) {
                report(file, a->location, "initial must be a basis index below 2^nqubits");
            } else {
                job.initial_state = *v;
            }
        }
        if (const auto *a = el.find("ham")) {
            built.ham_attr = a->value;
        }
        if (const auto *a = el.find("k")) {
            auto v = to_number<int>(a->value);
            if (!v || *v < 1) {
                report(file, a->location, "k must be a positive integer");
            } else {
                job.options.margins_k = *v;
            }
        }
        if (const auto *a = el.find("maxiter")) {
            auto v = to_number<int>(a->value);
            if (!v || *v < 1) {
                report(file, a->location, "maxiter must be a positive integer");
            } else {
                job.options.max_iter = *v;
            }
        }
        if (const auto *a = el.find("tol")) {
            auto v = to_number<double>(a->value);
            if (!v || !(*v > 0.0)) {
                report(file, a->location, "tol must be a positive number");
            } else {
                job.options.tol = *v;
            }
        }

        std::map<std::string, Location> ham_sites;
        for (const Element &child : el.children) {
            if (child.name == "hamiltonian") {
                hamiltonian(child, file, job, ham_sites);
            } else if (child.name == "step") {
                step(child, file, built);
            } else if (child.name == "include") {
                if (resolve_includes) {
                    include(child, file, base_dir, stack, built, ham_sites);
                } else {
                    report(file, child.location, "<include> is not allowed here");
                }
            } else {
                report(file, child.location, "unknown element <" + child.name + "> in <job>");
            }
        }
        if (!ok) {
            return std::nullopt;
        }
        finish(built, file);
        return built;
    }

   private:
    void report(const std::string &file, Location at, std::string message) {
        diags_.push_back(Diagnostic{file, at.line, at.column, std::move(message)});
    }

    void check_attributes(const Element &el, const std::string &file, std::initializer_list<std::string_view> allowed) {
        for (const auto &a : el.attributes) {
            if (std::find(allowed.begin(), allowed.end(), a.name) == allowed.end()) {
                report(file, a.location, "unknown attribute '" + a.name + "' on <" + el.name + ">");
            }
        }
    }

    std::optional<long long> required_int(const Element &el, std::string_view name, const std::string &file) {
        const auto *a = el.find(name);
        if (!a) {
            report(file, el.location, "missing attribute '" + std::string(name) + "' on <" + el.name + ">");
            return std::nullopt;
        }
        auto v = to_number<long long>(a->value);
        if (!v) {
            report(file, a->location, "attribute '" + std::string(name) + "' must be an integer");
        }
        return v;
    }

    std::optional<double> required_real(const Element &el, std::string_view name, const std::string &file) {
        const auto *a = el.find(name);
        if (!a) {
            report(file, el.location, "missing attribute '" + std::string(name) + "' on <" + el.name + ">");
            return std::nullopt;
        }
        auto v = to_number<double>(a->value);
        if (!v || !std::isfinite(*v)) {
            report(file, a->location, "attribute '" + std::string(name) + "' must be a finite number");
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::vector<QubitIndex>> qubit_list(const Element &el, std::string_view name,
                                                      const std::string &file, bool required) {
        const auto *a = el.find(name);
        if (!a) {
            if (required) {
                report(file, el.location, "missing attribute '" + std::string(name) + "' on <" + el.name + ">");
                return std::nullopt;
            }
            return std::vector<QubitIndex>{};
        }
        std::vector<QubitIndex> out;
        for (const std::string &piece : split(a->value, ",")) {
            auto v = to_number<int>(piece);
            if (!v) {
                report(file, a->location, "attribute '" + std::string(name) + "' must list qubit numbers");
                return std::nullopt;
            }
            out.push_back(QubitIndex{*v});
        }
        return out;
    }

    std::optional<std::vector<double>> reals(const Element &el, std::string_view name, std::size_t count,
                                             const std::string &file) {
        const auto *a = el.find(name);
        if (!a) {
            report(file, el.location, "missing attribute '" + std::string(name) + "' on <" + el.name + ">");
            return std::nullopt;
        }
        std::vector<double> out;
        for (const std::string &piece : split(a->value, " ,\t\n")) {
            auto v = to_number<double>(piece);
            if (!v || !std::isfinite(*v)) {
                report(file, a->location, "attribute '" + std::string(name) + "' must hold finite reals");
                return std::nullopt;
            }
            out.push_back(*v);
        }
        if (out.size() != count) {
            report(file, a->location,
                   "attribute '" + std::string(name) + "' needs " + std::to_string(count) + " reals, got " +
                       std::to_string(out.size()));
            return std::nullopt;
        }
        return out;
    }

    void hamiltonian(const Element &el, const std::string &file, JobTree &job,
                     std::map<std::string, Location> &sites) {
        check_attributes(el, file, {"name", "nqubits"});
        const auto *name = el.find("name");
        if (!name || name->value.empty()) {
            report(file, el.location, "missing attribute 'name' on <hamiltonian>");
            return;
        }
        int n = job.n_qubits;
        if (el.find("nqubits")) {
            auto v = required_int(el, "nqubits", file);
            if (!v) {
                return;
            }
            if (*v < 1 || *v > kMaxQubits) {
                report(file, el.find("nqubits")->location, "hamiltonian nqubits out of range");
                return;
            }
            n = static_cast<int>(*v);
        }
        if (n < 1) {
            return;
        }
        PauliCouplingModel model = PauliCouplingModel::zeros(n);
        for (const Element &child : el.children) {
            if (child.name == "coupling") {
                check_attributes(child, file, {"i", "j", "jij", "e2"});
                auto i = required_int(child, "i", file);
                auto j = required_int(child, "j", file);
                double jij = 1.0;
                if (child.find("jij")) {
                    auto v = required_real(child, "jij", file);
                    if (!v) {
                        continue;
                    }
                    jij = *v;
                }
                auto e2 = reals(child, "e2", 9, file);
                if (!i || !j || !e2) {
                    continue;
                }
                Eigen::Matrix3d m;
                for (int r = 0; r < 3; ++r) {
                    for (int c = 0; c < 3; ++c) {
                        m(r, c) = (*e2)[static_cast<std::size_t>(3 * r + c)];
                    }
                }
                try {
                    model.set_coupling(static_cast<int>(*i), static_cast<int>(*j), jij, m);
                } catch (const InputError &e) {
                    report(file, child.location, e.what());
                }
            } else if (child.name == "field") {
                check_attributes(child, file, {"i", "e1"});
                auto i = required_int(child, "i", file);
                auto e1 = reals(child, "e1", 3, file);
                if (!i || !e1) {
                    continue;
                }
                try {
                    model.set_field(static_cast<int>(*i), Eigen::Vector3d((*e1)[0], (*e1)[1], (*e1)[2]));
                } catch (const InputError &e) {
                    report(file, child.location, e.what());
                }
            } else {
                report(file, child.location, "unknown element <" + child.name + "> in <hamiltonian>");
            }
        }
        if (job.hamiltonians.count(name->value)) {
            report(file, el.location, "hamiltonian '" + name->value + "' defined twice");
            return;
        }
        job.hamiltonians.emplace(name->value, std::move(model));
        sites.emplace(name->value, el.location);
    }

    void step(const Element &el, const std::string &file, BuiltJob &built) {
        check_attributes(el, file, {});
        TimeStep ts;
        StepSite site{el.location, file, {}};
        for (const Element &child : el.children) {
            std::optional<GateSpec> g;
            if (child.name == "gate") {
                g = gate(child, file);
            } else if (child.name == "measure") {
                check_attributes(child, file, {"targets"});
                auto t = qubit_list(child, "targets", file, true);
                if (t) {
                    GateSpec m;
                    m.kind = GateKind::Measure;
                    m.targets = *t;
                    g = m;
                }
            } else if (child.name == "exp") {
                g = exp_node(child, file);
            } else {
                report(file, child.location, "unknown element <" + child.name + "> in <step>");
            }
            if (g) {
                ts.gates.push_back(std::move(*g));
                site.gates.push_back(GateSite{child.location, file});
            }
        }
        built.job.circuit.steps.push_back(std::move(ts));
        built.sites.push_back(std::move(site));
    }

    std::optional<GateSpec> gate(const Element &el, const std::string &file) {
        check_attributes(el, file,
                         {"kind", "targets", "controls", "theta", "marked", "iterations", "a", "modn", "xreg", "yreg",
                          "matrix"});
        const auto *kind_attr = el.find("kind");
        if (!kind_attr) {
            report(file, el.location, "missing attribute 'kind' on <gate>");
            return std::nullopt;
        }
        const auto kind = parse_kind(kind_attr->value);
        if (!kind || *kind == GateKind::Exp || *kind == GateKind::Measure) {
            report(file, kind_attr->location, "unknown gate kind '" + kind_attr->value + "'");
            return std::nullopt;
        }
        GateSpec g;
        g.kind = *kind;
        bool ok = true;
        auto unused = [&](std::string_view attr) {
            if (const auto *a = el.find(attr)) {
                report(file, a->location,
                       "attribute '" + std::string(attr) + "' is not used by " + std::string(kind_name(g.kind)));
                ok = false;
            }
        };
        const bool rotation = g.kind == GateKind::Phase || g.kind == GateKind::RX || g.kind == GateKind::RY ||
                              g.kind == GateKind::RZ;
        const bool marked_kind =
            g.kind == GateKind::Oracle || g.kind == GateKind::GroverStep || g.kind == GateKind::Grover;

        if (g.kind == GateKind::Modulo) {
            unused("targets");
            unused("controls");
            auto x = qubit_list(el, "xreg", file, true);
            auto y = qubit_list(el, "yreg", file, true);
            auto a = el.find("a") ? to_number<std::uint64_t>(el.find("a")->value) : std::nullopt;
            auto m = el.find("modn") ? to_number<std::uint64_t>(el.find("modn")->value) : std::nullopt;
            if (!a) {
                report(file, el.find("a") ? el.find("a")->location : el.location,
                       "MODULO needs a non-negative integer attribute 'a'");
            }
            if (!m) {
                report(file, el.find("modn") ? el.find("modn")->location : el.location,
                       "MODULO needs a positive integer attribute 'modn'");
            }
            if (!x || !y || !a || !m) {
                return std::nullopt;
            }
            g.xreg = *x;
            g.yreg = *y;
            g.base = *a;
            g.modulus = *m;
        } else {
            unused("xreg");
            unused("yreg");
            unused("a");
            unused("modn");
            auto t = qubit_list(el, "targets", file, true);
            auto c = qubit_list(el, "controls", file, false);
            if (!t || !c) {
                return std::nullopt;
            }
            g.targets = *t;
            g.controls = *c;
        }
        if (rotation) {
            auto theta = required_real(el, "theta", file);
            if (!theta) {
                return std::nullopt;
            }
            g.theta = *theta;
        } else {
            unused("theta");
        }
        if (marked_kind) {
            const auto *a = el.find("marked");
            if (!a) {
                report(file, el.location, "missing attribute 'marked' on " + std::string(kind_name(g.kind)));
                return std::nullopt;
            }
            for (const std::string &piece : split(a->value, ",")) {
                auto v = to_number<std::uint64_t>(piece);
                if (!v) {
                    report(file, a->location, "attribute 'marked' must list basis indices");
                    return std::nullopt;
                }
                g.marked.push_back(*v);
            }
        } else {
            unused("marked");
        }
        if (g.kind == GateKind::Grover) {
            if (const auto *a = el.find("iterations")) {
                auto v = to_number<int>(a->value);
                if (!v || *v < 0) {
                    report(file, a->location, "iterations must be a non-negative integer");
                    return std::nullopt;
                }
                g.iterations = *v;
            }
        } else {
            unused("iterations");
        }
        if (g.kind == GateKind::Custom1 || g.kind == GateKind::Custom2) {
            const auto *a = el.find("matrix");
            if (!a) {
                report(file, el.location, "missing attribute 'matrix' on " + std::string(kind_name(g.kind)));
                return std::nullopt;
            }
            const Eigen::Index dim = g.kind == GateKind::Custom1 ? 2 : 4;
            const auto entries = split(a->value, ";");
            if (entries.size() != static_cast<std::size_t>(dim * dim)) {
                report(file, a->location,
                       "matrix needs " + std::to_string(dim * dim) + " complex entries, got " +
                           std::to_string(entries.size()));
                return std::nullopt;
            }
            g.matrix = Matrix(dim, dim);
            for (Eigen::Index idx = 0; idx < dim * dim; ++idx) {
                const auto parts = split(entries[static_cast<std::size_t>(idx)], ",");
                std::optional<double> re = parts.size() == 2 ? to_number<double>(parts[0]) : std::nullopt;
                std::optional<double> im = parts.size() == 2 ? to_number<double>(parts[1]) : std::nullopt;
                if (!re || !im) {
                    report(file, a->location, "matrix entries must be 're,im' pairs");
                    return std::nullopt;
                }
                g.matrix(idx / dim, idx % dim) = Complex(*re, *im);
            }
        } else {
            unused("matrix");
        }
        if (!ok) {
            return std::nullopt;
        }
        return g;
    }

    std::optional<GateSpec> exp_node(const Element &el, const std::string &file) {
        check_attributes(el, file, {"ham", "t", "n", "order", "targets"});
        GateSpec g;
        g.kind = GateKind::Exp;
        const auto *ham = el.find("ham");
        if (!ham || ham->value.empty()) {
            report(file, el.location, "missing attribute 'ham' on <exp>");
            return std::nullopt;
        }
        g.exp.hamiltonian = ham->value;
        auto t = required_real(el, "t", file);
        if (!t) {
            return std::nullopt;
        }
        g.exp.t = *t;
        if (el.find("n")) {
            auto n = required_int(el, "n", file);
            if (!n) {
                return std::nullopt;
            }
            if (*n < 1) {
                report(file, el.find("n")->location, "Trotter slice count must be >= 1");
                return std::nullopt;
            }
            g.exp.slices = static_cast<int>(*n);
        }
        if (const auto *order = el.find("order")) {
            if (order->value == "exact") {
                g.exp.order = kExactOrder;
            } else if (order->value == "1" || order->value == "2" || order->value == "4") {
                g.exp.order = order->value[0] - '0';
            } else {
                report(file, order->location, "order must be 1, 2, 4 or exact");
                return std::nullopt;
            }
        }
        auto targets = qubit_list(el, "targets", file, false);
        if (!targets) {
            return std::nullopt;
        }
        g.targets = *targets;
        return g;
    }

    void include(const Element &el, const std::string &file, const fs::path &base_dir,
                 std::vector<std::string> &stack, BuiltJob &parent, std::map<std::string, Location> &ham_sites) {
        check_attributes(el, file, {"href", "map"});
        const auto *href = el.find("href");
        if (!href || href->value.empty()) {
            report(file, el.location, "missing attribute 'href' on <include>");
            return;
        }
        std::string text;
        std::string key;
        fs::path child_dir;
        std::string child_file;
        if (is_remote(href->value)) {
            if (!options_.allow_remote || !options_.fetch) {
                report(file, href->location, "remote include '" + href->value + "' is not allowed");
                return;
            }
            key = href->value;
            child_file = href->value;
            try {
                text = options_.fetch(href->value);
            } catch (const std::exception &e) {
                report(file, href->location, "include target unreachable: " + href->value + " (" + e.what() + ")");
                return;
            }
        } else {
            if (base_dir.empty() && root_.empty()) {
                report(file, href->location, "include target unreachable: no base directory for '" + href->value + "'");
                return;
            }
            std::error_code ec;
            const fs::path resolved = fs::weakly_canonical(base_dir / href->value, ec);
            if (ec || !path_within(resolved, root_)) {
                report(file, href->location, "include '" + href->value + "' escapes the include root");
                return;
            }
            std::ifstream in(resolved, std::ios::binary);
            if (!fs::is_regular_file(resolved, ec) || !in) {
                report(file, href->location, "include target unreachable: " + href->value);
                return;
            }
            std::ostringstream ss;
            ss << in.rdbuf();
            text = ss.str();
            key = resolved.string();
            child_dir = resolved.parent_path();
            child_file = fs::relative(resolved, root_, ec).string();
            if (ec || child_file.empty()) {
                child_file = resolved.string();
            }
        }
        if (std::find(stack.begin(), stack.end(), key) != stack.end()) {
            std::string chain;
            for (const auto &s : stack) {
                chain += s + " -> ";
            }
            report(file, href->location, "include cycle: " + chain + key);
            return;
        }

        stack.push_back(key);
        const std::size_t before = diags_.size();
        std::optional<BuiltJob> fragment = document(text, child_file, child_dir, stack);
        stack.pop_back();
        if (!fragment || diags_.size() != before) {
            if (diags_.size() == before) {
                report(file, href->location, "included document '" + href->value + "' is invalid");
            }
            return;
        }
        if (fragment->job.type != JobType::Circuit) {
            report(file, href->location, "included document must be a circuit job");
            return;
        }

        // map="local:global,..." must cover every fragment qubit exactly once.
        const int frag_n = fragment->job.n_qubits;
        std::vector<int> mapping(static_cast<std::size_t>(frag_n) + 1, 0);
        if (const auto *map_attr = el.find("map")) {
            const auto pairs = split(map_attr->value, ",");
            if (pairs.size() != static_cast<std::size_t>(frag_n)) {
                report(file, map_attr->location,
                       "qubit map arity mismatch: fragment has " + std::to_string(frag_n) + " qubits, map lists " +
                           std::to_string(pairs.size()));
                return;
            }
            std::set<int> globals;
            for (const std::string &p : pairs) {
                const auto parts = split(p, ":");
                auto local = parts.size() == 2 ? to_number<int>(parts[0]) : std::nullopt;
                auto global = parts.size() == 2 ? to_number<int>(parts[1]) : std::nullopt;
                if (!local || !global) {
                    report(file, map_attr->location, "map entries must be 'local:global'");
                    return;
                }
                if (*local < 1 || *local > frag_n || mapping[static_cast<std::size_t>(*local)] != 0) {
                    report(file, map_attr->location, "map entry for local qubit " + std::to_string(*local) +
                                                         " is out of range or repeated");
                    return;
                }
                if (*global < 1 || *global > parent.job.n_qubits || !globals.insert(*global).second) {
                    report(file, map_attr->location,
                           "map target qubit " + std::to_string(*global) + " is out of range or repeated");
                    return;
                }
                mapping[static_cast<std::size_t>(*local)] = *global;
            }
        } else {
            if (frag_n > parent.job.n_qubits) {
                report(file, el.location, "qubit map arity mismatch: fragment is wider than the job");
                return;
            }
            for (int i = 1; i <= frag_n; ++i) {
                mapping[static_cast<std::size_t>(i)] = i;
            }
        }
        auto remap = [&](std::vector<QubitIndex> &qs) {
            for (QubitIndex &q : qs) {
                q.value = mapping[static_cast<std::size_t>(q.value)];
            }
        };
        for (const auto &[name, model] : fragment->job.hamiltonians) {
            auto it = parent.job.hamiltonians.find(name);
            if (it == parent.job.hamiltonians.end()) {
                parent.job.hamiltonians.emplace(name, model);
                ham_sites.emplace(name, el.location);
            } else if (!(it->second == model)) {
                report(file, el.location, "hamiltonian '" + name + "' redefined by include");
            }
        }
        for (std::size_t s = 0; s < fragment->job.circuit.steps.size(); ++s) {
            TimeStep ts = fragment->job.circuit.steps[s];
            StepSite site{el.location, file, {}};
            for (GateSpec &g : ts.gates) {
                remap(g.targets);
                remap(g.controls);
                remap(g.xreg);
                remap(g.yreg);
                site.gates.push_back(GateSite{el.location, file});
            }
            parent.job.circuit.steps.push_back(std::move(ts));
            parent.sites.push_back(std::move(site));
        }
    }

    // Cross-element checks once the whole job is known.
    void finish(BuiltJob &built, const std::string &file) {
        JobTree &job = built.job;
        if (job.type != JobType::Circuit) {
            if (!job.circuit.steps.empty()) {
                report(file, built.sites.front().location, "spectrum jobs cannot contain steps");
            }
            std::string name = built.ham_attr;
            if (name.empty() && job.hamiltonians.size() == 1) {
                name = job.hamiltonians.begin()->first;
            }
            auto it = job.hamiltonians.find(name);
            if (name.empty() || it == job.hamiltonians.end()) {
                report(file, built.location,
                       name.empty() ? "spectrum job needs exactly one hamiltonian or a 'ham' attribute"
                                    : "unknown hamiltonian '" + name + "'");
                return;
            }
            if (it->second.n_qubits != job.n_qubits) {
                report(file, built.location, "hamiltonian '" + name + "' has " + std::to_string(it->second.n_qubits) +
                                                 " qubits but the job has " + std::to_string(job.n_qubits));
                return;
            }
            job.spectrum_hamiltonian = name;
            return;
        }
        if (!built.ham_attr.empty()) {
            report(file, built.location, "attribute 'ham' only applies to spectrum jobs");
        }
        for (std::size_t s = 0; s < job.circuit.steps.size(); ++s) {
            TimeStep &ts = job.circuit.steps[s];
            const StepSite &site = built.sites[s];
            std::uint64_t used = 0;
            bool overlap_reported = false;
            for (std::size_t gi = 0; gi < ts.gates.size(); ++gi) {
                GateSpec &g = ts.gates[gi];
                const GateSite &gs = site.gates[gi];
                if (g.kind == GateKind::Exp) {
                    auto it = job.hamiltonians.find(g.exp.hamiltonian);
                    if (it == job.hamiltonians.end()) {
                        report(gs.file, gs.location, "unknown hamiltonian '" + g.exp.hamiltonian + "'");
                        continue;
                    }
                    if (g.targets.empty()) {
                        for (int q = 1; q <= it->second.n_qubits; ++q) {
                            g.targets.push_back(QubitIndex{q});
                        }
                    }
                    if (g.targets.size() != static_cast<std::size_t>(it->second.n_qubits)) {
                        report(gs.file, gs.location,
                               "exp targets list " + std::to_string(g.targets.size()) + " qubits but hamiltonian '" +
                                   g.exp.hamiltonian + "' has " + std::to_string(it->second.n_qubits));
                        continue;
                    }
                }
                try {
                    validate_gate(g, job.n_qubits);
                } catch (const InputError &e) {
                    report(gs.file, gs.location, "step " + std::to_string(s + 1) + ": " + e.what());
                    continue;
                }
                for (QubitIndex q : g.support()) {
                    const std::uint64_t bit = std::uint64_t{1} << q.value;
                    if ((used & bit) && !overlap_reported) {
                        report(site.file, site.location,
                               "overlapping supports in step " + std::to_string(s + 1) + " (qubit " +
                                   std::to_string(q.value) + ")");
                        overlap_reported = true;
                    }
                    used |= bit;
                }
            }
        }
    }

    const ParseOptions &options_;
    fs::path root_;
    std::vector<Diagnostic> &diags_;
};

fs::path directory_of(const fs::path &base_path) {
    if (base_path.empty()) {
        return {};
    }
    std::error_code ec;
    if (fs::is_directory(base_path, ec)) {
        return fs::weakly_canonical(base_path, ec);
    }
    return fs::weakly_canonical(base_path, ec).parent_path();
}

std::optional<JobTree> run_builder(std::string_view text, const fs::path &base_path, const ParseOptions &options,
                                   const std::string &display, std::vector<Diagnostic> &diags) {
    const fs::path base_dir = directory_of(base_path);
    fs::path root = options.include_root.empty() ? base_dir : options.include_root;
    if (!root.empty()) {
        std::error_code ec;
        root = fs::weakly_canonical(root, ec);
    }
    Builder builder(options, root, diags);
    std::vector<std::string> stack;
    std::error_code ec;
    if (!base_path.empty() && fs::is_regular_file(base_path, ec)) {
        stack.push_back(fs::weakly_canonical(base_path, ec).string());
    }
    auto built = builder.document(text, display, base_dir, stack);
    if (!built || !diags.empty()) {
        return std::nullopt;
    }
    return std::move(built->job);
}

// ---- serialization ----

xml::Element make(std::string name) {
    xml::Element e;
    e.name = std::move(name);
    return e;
}

void attr(xml::Element &e, std::string name, std::string value) {
    e.attributes.push_back(xml::Attribute{std::move(name), std::move(value), {}});
}

std::string join_reals(std::span<const double> values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) {
            out += ' ';
        }
        out += format_number(values[i]);
    }
    return out;
}

xml::Element job_element(const JobTree &job) {
    xml::Element e = make("job");
    attr(e, "type", std::string(job_type_name(job.type)));
    attr(e, "nqubits", std::to_string(job.n_qubits));
    if (job.initial_state != 0) {
        attr(e, "initial", std::to_string(job.initial_state));
    }
    if (job.options.seed) {
        attr(e, "seed", std::to_string(*job.options.seed));
    }
    attr(e, "threshold", format_number(job.options.threshold));
    if (job.type != JobType::Circuit) {
        attr(e, "ham", job.spectrum_hamiltonian);
    }
    if (job.type == JobType::SpectrumMargins) {
        attr(e, "k", std::to_string(job.options.margins_k));
        attr(e, "maxiter", std::to_string(job.options.max_iter));
        attr(e, "tol", format_number(job.options.tol));
    }
    for (const auto &[name, model] : job.hamiltonians) {
        xml::Element h = make("hamiltonian");
        attr(h, "name", name);
        attr(h, "nqubits", std::to_string(model.n_qubits));
        for (const auto &[key, e2] : model.pair_terms) {
            xml::Element c = make("coupling");
            attr(c, "i", std::to_string(key.first));
            attr(c, "j", std::to_string(key.second));
            attr(c, "jij", format_number(model.coupling(key.first - 1, key.second - 1)));
            std::vector<double> flat;
            for (int r = 0; r < 3; ++r) {
                for (int col = 0; col < 3; ++col) {
                    flat.push_back(e2(r, col));
                }
            }
            attr(c, "e2", join_reals(flat));
            h.children.push_back(std::move(c));
        }
        for (int i = 1; i <= model.n_qubits; ++i) {
            const Eigen::Vector3d &f = model.fields[static_cast<std::size_t>(i - 1)];
            if (f.isZero(0.0)) {
                continue;
            }
            xml::Element fe = make("field");
            attr(fe, "i", std::to_string(i));
            const std::vector<double> flat{f(0), f(1), f(2)};
            attr(fe, "e1", join_reals(flat));
            h.children.push_back(std::move(fe));
        }
        e.children.push_back(std::move(h));
    }
    for (const TimeStep &ts : job.circuit.steps) {
        xml::Element s = make("step");
        for (const GateSpec &g : ts.gates) {
            if (g.kind == GateKind::Measure) {
                xml::Element m = make("measure");
                attr(m, "targets", join_qubits(g.targets));
                s.children.push_back(std::move(m));
                continue;
            }
            if (g.kind == GateKind::Exp) {
                xml::Element x = make("exp");
                attr(x, "ham", g.exp.hamiltonian);
                attr(x, "t", format_number(g.exp.t));
                attr(x, "n", std::to_string(g.exp.slices));
                attr(x, "order", g.exp.order == kExactOrder ? std::string("exact") : std::to_string(g.exp.order));
                attr(x, "targets", join_qubits(g.targets));
                s.children.push_back(std::move(x));
                continue;
            }
            xml::Element ge = make("gate");
            attr(ge, "kind", std::string(kind_name(g.kind)));
            if (g.kind == GateKind::Modulo) {
                attr(ge, "a", std::to_string(g.base));
                attr(ge, "modn", std::to_string(g.modulus));
                attr(ge, "xreg", join_qubits(g.xreg));
                attr(ge, "yreg", join_qubits(g.yreg));
            } else {
                if (!g.controls.empty()) {
                    attr(ge, "controls", join_qubits(g.controls));
                }
                attr(ge, "targets", join_qubits(g.targets));
            }
            switch (g.kind) {
                case GateKind::Phase:
                case GateKind::RX:
                case GateKind::RY:
                case GateKind::RZ:
                    attr(ge, "theta", format_number(g.theta));
                    break;
                case GateKind::Oracle:
                case GateKind::GroverStep:
                case GateKind::Grover: {
                    std::string marked;
                    for (std::size_t i = 0; i < g.marked.size(); ++i) {
                        if (i) {
                            marked += ',';
                        }
                        marked += std::to_string(g.marked[i]);
                    }
                    attr(ge, "marked", marked);
                    if (g.kind == GateKind::Grover) {
                        attr(ge, "iterations", std::to_string(g.iterations));
                    }
                    break;
                }
                case GateKind::Custom1:
                case GateKind::Custom2: {
                    std::string m;
                    for (Eigen::Index r = 0; r < g.matrix.rows(); ++r) {
                        for (Eigen::Index c = 0; c < g.matrix.cols(); ++c) {
                            if (!m.empty()) {
                                m += ';';
                            }
                            m += format_number(g.matrix(r, c).real()) + "," + format_number(g.matrix(r, c).imag());
                        }
                    }
                    attr(ge, "matrix", m);
                    break;
                }
                default:
                    break;
            }
            s.children.push_back(std::move(ge));
        }
        e.children.push_back(std::move(s));
    }
    return e;
}

std::string document(xml::Element body) {
    xml::Element root = make("qml");
    attr(root, "version", std::string(kVersion));
    root.children.push_back(std::move(body));
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    xml::write(root, out);
    return out;
}

xml::Element result_header(const std::string &engine) {
    xml::Element r = make("result");
    attr(r, "engine", engine);
    return r;
}

// ---- result reading ----

[[noreturn]] void bad_result(const xml::Element &el, const std::string &message) {
    throw QmlError({Diagnostic{"", el.location.line, el.location.column, message}});
}

const std::string &need(const xml::Element &el, std::string_view name) {
    const auto *a = el.find(name);
    if (!a) {
        bad_result(el, "missing attribute '" + std::string(name) + "' on <" + el.name + ">");
    }
    return a->value;
}

template <typename T>
T need_number(const xml::Element &el, std::string_view name) {
    auto v = to_number<T>(need(el, name));
    if (!v) {
        bad_result(el, "attribute '" + std::string(name) + "' on <" + el.name + "> is not a number");
    }
    return *v;
}

}  // namespace

std::string_view job_type_name(JobType type) {
    switch (type) {
        case JobType::Circuit:
            return "circuit";
        case JobType::SpectrumFull:
            return "spectrum-full";
        case JobType::SpectrumMargins:
            return "spectrum-margins";
    }
    return "circuit";
}

std::string Diagnostic::to_string() const {
    std::string out;
    if (!file.empty()) {
        out += file + ":";
    }
    out += std::to_string(line) + ":" + std::to_string(column) + ": " + message;
    return out;
}

QmlError::QmlError(std::vector<Diagnostic> diagnostics)
    : InputError(diagnostics.empty() ? std::string("invalid QML document") : diagnostics.front().to_string()),
      diagnostics_(std::move(diagnostics)) {
}

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        return "nan";
    }
    return std::string(buf, ptr);
}

JobTree parse(std::string_view text, const fs::path &base_path, const ParseOptions &options) {
    std::vector<Diagnostic> diags;
    auto job = run_builder(text, base_path, options, "", diags);
    if (!job) {
        if (diags.empty()) {
            diags.push_back(Diagnostic{"", 1, 1, "invalid QML document"});
        }
        throw QmlError(std::move(diags));
    }
    return std::move(*job);
}

JobTree parse_file(const fs::path &path, const ParseOptions &options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path, options);
}

std::vector<Diagnostic> validate(std::string_view text, const fs::path &base_path, const ParseOptions &options) {
    std::vector<Diagnostic> diags;
    auto job = run_builder(text, base_path, options, "", diags);
    if (!job && diags.empty()) {
        diags.push_back(Diagnostic{"", 1, 1, "invalid QML document"});
    }
    return diags;
}

std::string serialize_job(const JobTree &job) {
    return document(job_element(job));
}

std::string serialize_result(const JobTree &job, const Trace &trace) {
    xml::Element r = result_header(trace.engine);
    attr(r, "rng", trace.rng);
    attr(r, "seed", std::to_string(trace.seed));
    attr(r, "threshold", format_number(trace.threshold));
    r.children.push_back(job_element(job));
    for (const std::string &w : trace.warnings) {
        xml::Element we = make("warning");
        attr(we, "text", w);
        r.children.push_back(std::move(we));
    }
    for (const StepRecord &rec : trace.records) {
        xml::Element re = make("record");
        attr(re, "step", std::to_string(rec.step));
        for (std::size_t q = 0; q < rec.bloch.size(); ++q) {
            xml::Element b = make("bloch");
            attr(b, "i", std::to_string(q + 1));
            attr(b, "x", format_number(rec.bloch[q][0]));
            attr(b, "y", format_number(rec.bloch[q][1]));
            attr(b, "z", format_number(rec.bloch[q][2]));
            re.children.push_back(std::move(b));
        }
        for (const BasisEntry &entry : rec.listing) {
            xml::Element b = make("base");
            attr(b, "index", std::to_string(entry.index));
            attr(b, "p", format_number(entry.probability));
            attr(b, "phase", format_number(entry.phase));
            re.children.push_back(std::move(b));
        }
        xml::Element en = make("entropy");
        attr(en, "v", format_number(rec.entropy));
        re.children.push_back(std::move(en));
        for (const MeasurementRecord &m : rec.measurements) {
            xml::Element o = make("outcome");
            attr(o, "targets", join_qubits(m.targets));
            attr(o, "bits", m.bits());
            attr(o, "p", format_number(m.probability));
            attr(o, "draw", std::to_string(m.rng_draw));
            re.children.push_back(std::move(o));
        }
        r.children.push_back(std::move(re));
    }
    return document(std::move(r));
}

std::string serialize_result(const JobTree &job, const Spectrum &spectrum) {
    xml::Element r = result_header(spectrum.method == "lanczos" ? "spectrum-lanczos" : "spectrum-dense");
    r.children.push_back(job_element(job));
    xml::Element s = make("spectrum");
    attr(s, "method", spectrum.method);
    if (spectrum.method == "lanczos") {
        attr(s, "seed", std::to_string(spectrum.seed));
        attr(s, "iterations", std::to_string(spectrum.iterations));
    }
    for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i) {
        xml::Element ev = make("ev");
        attr(ev, "v", format_number(spectrum.eigenvalues[i]));
        attr(ev, "converged", spectrum.converged[i] ? "true" : "false");
        attr(ev, "residual", format_number(spectrum.residuals[i]));
        s.children.push_back(std::move(ev));
    }
    r.children.push_back(std::move(s));
    return document(std::move(r));
}

ResultDocument parse_result(std::string_view text) {
    xml::Element root;
    try {
        root = xml::parse(text);
    } catch (const xml::SyntaxError &e) {
        throw QmlError({Diagnostic{"", e.location().line, e.location().column, std::string("syntax error: ") + e.what()}});
    }
    std::vector<Diagnostic> diags;
    ParseOptions options;
    Builder builder(options, {}, diags);
    const xml::Element *result = builder.qml_root(root, "", "result");
    if (!result || !diags.empty()) {
        throw QmlError(std::move(diags));
    }
    ResultDocument doc;
    doc.engine = need(*result, "engine");
    const xml::Element *job_el = nullptr;
    for (const xml::Element &c : result->children) {
        if (c.name == "job") {
            job_el = &c;
        }
    }
    if (!job_el) {
        bad_result(*result, "result does not embed its job");
    }
    std::vector<std::string> stack;
    auto built = builder.job(*job_el, "", {}, stack, false);
    if (!built || !diags.empty()) {
        throw QmlError(std::move(diags));
    }
    doc.job = std::move(built->job);

    const bool is_spectrum = std::any_of(result->children.begin(), result->children.end(),
                                         [](const xml::Element &c) { return c.name == "spectrum"; });
    if (is_spectrum) {
        Spectrum sp;
        for (const xml::Element &c : result->children) {
            if (c.name != "spectrum") {
                continue;
            }
            sp.method = need(c, "method");
            if (c.find("seed")) {
                sp.seed = need_number<std::uint64_t>(c, "seed");
            }
            if (c.find("iterations")) {
                sp.iterations = need_number<int>(c, "iterations");
            }
            for (const xml::Element &ev : c.children) {
                if (ev.name != "ev") {
                    bad_result(ev, "unexpected <" + ev.name + "> in <spectrum>");
                }
                sp.eigenvalues.push_back(need_number<double>(ev, "v"));
                sp.converged.push_back(need(ev, "converged") == "true");
                sp.residuals.push_back(ev.find("residual") ? need_number<double>(ev, "residual") : 0.0);
            }
        }
        doc.spectrum = std::move(sp);
        return doc;
    }

    Trace trace;
    trace.engine = doc.engine;
    trace.rng = need(*result, "rng");
    trace.seed = need_number<std::uint64_t>(*result, "seed");
    trace.threshold = need_number<double>(*result, "threshold");
    for (const xml::Element &c : result->children) {
        if (c.name == "job") {
            continue;
        }
        if (c.name == "warning") {
            trace.warnings.push_back(need(c, "text"));
            continue;
        }
        if (c.name != "record") {
            bad_result(c, "unexpected <" + c.name + "> in <result>");
        }
        StepRecord rec;
        rec.step = need_number<int>(c, "step");
        for (const xml::Element &item : c.children) {
            if (item.name == "bloch") {
                const int i = need_number<int>(item, "i");
                if (i != static_cast<int>(rec.bloch.size()) + 1) {
                    bad_result(item, "bloch rows must be listed in qubit order");
                }
                rec.bloch.push_back(
                    {need_number<double>(item, "x"), need_number<double>(item, "y"), need_number<double>(item, "z")});
            } else if (item.name == "base") {
                rec.listing.push_back({need_number<std::uint64_t>(item, "index"), need_number<double>(item, "p"),
                                       need_number<double>(item, "phase")});
            } else if (item.name == "entropy") {
                rec.entropy = need_number<double>(item, "v");
            } else if (item.name == "outcome") {
                MeasurementRecord m;
                m.step = rec.step;
                for (const std::string &piece : split(need(item, "targets"), ",")) {
                    auto v = to_number<int>(piece);
                    if (!v) {
                        bad_result(item, "bad outcome targets");
                    }
                    m.targets.push_back(QubitIndex{*v});
                }
                const std::string &bits = need(item, "bits");
                if (bits.size() != m.targets.size()) {
                    bad_result(item, "outcome bits do not match targets");
                }
                for (char b : bits) {
                    if (b != '0' && b != '1') {
                        bad_result(item, "outcome bits must be 0/1");
                    }
                    m.outcome = (m.outcome << 1) | static_cast<std::uint64_t>(b == '1');
                }
                m.probability = need_number<double>(item, "p");
                if (item.find("draw")) {
                    m.rng_draw = need_number<std::uint64_t>(item, "draw");
                }
                rec.measurements.push_back(std::move(m));
            } else {
                bad_result(item, "unexpected <" + item.name + "> in <record>");
            }
        }
        trace.records.push_back(std::move(rec));
    }
    doc.trace = std::move(trace);
    return doc;
}

}  // namespace qmlsim::qml
