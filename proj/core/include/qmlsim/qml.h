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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmlsim/errors.h"
#include "qmlsim/gates.h"
#include "qmlsim/hamiltonian.h"
#include "qmlsim/observables.h"
#include "qmlsim/solvers.h"

// QML: the XML job and result language.
//
//   <qml version="1.0">
//     <job type="circuit|spectrum-full|spectrum-margins" nqubits="N" seed="S" threshold="T"
//          initial="basis index" ham="name" k="K" maxiter="M" tol="TOL">
//       <hamiltonian name="h" nqubits="n">
//         <coupling i="1" j="2" jij="1" e2="9 reals, row-major"/>
//         <field i="1" e1="3 reals"/>
//       </hamiltonian>
//       <step>
//         <gate kind="CNOT" controls="1" targets="2"/>
//         <measure targets="1,2"/>
//         <exp ham="h" t="1" n="64" order="1|2|4|exact" targets="1,2"/>
//       </step>
//       <include href="bell.qml" map="1:3,2:4"/>
//     </job>
//   </qml>
//
// Result documents wrap an echo of the normalized job in <result> together
// with one <record> per time step or a <spectrum>.
namespace qmlsim::qml {

enum class JobType { Circuit, SpectrumFull, SpectrumMargins };

std::string_view job_type_name(JobType type);

struct JobOptions {
    double threshold = kDefaultThreshold;
    std::optional<std::uint64_t> seed;
    int margins_k = 4;
    int max_iter = 300;
    double tol = 1e-8;

    friend bool operator==(const JobOptions &, const JobOptions &) = default;
};

struct JobTree {
    JobType type = JobType::Circuit;
    int n_qubits = 0;
    std::uint64_t initial_state = 0;
    Circuit circuit;  // circuit jobs
    std::map<std::string, PauliCouplingModel> hamiltonians;
    std::string spectrum_hamiltonian;  // spectrum jobs
    JobOptions options;

    friend bool operator==(const JobTree &, const JobTree &) = default;
};

struct Diagnostic {
    std::string file;  // empty for the top-level document
    int line = 0;
    int column = 0;
    std::string message;

    /// "file:line:column: message" (file omitted when empty).
    std::string to_string() const;
};

/// Raised by parse(); what() is the first diagnostic.
class QmlError : public InputError {
   public:
    explicit QmlError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic> &diagnostics() const noexcept {
        return diagnostics_;
    }

   private:
    std::vector<Diagnostic> diagnostics_;
};

struct ParseOptions {
    /// Includes must resolve inside this directory. Empty: the directory of
    /// the top-level document.
    std::filesystem::path include_root;
    /// http(s) hrefs are only followed when enabled and a fetcher is given.
    bool allow_remote = false;
    std::function<std::string(const std::string &url)> fetch;
};

/// Parses and validates a job document. `base_path` is the document's own
/// path (or a directory), used to resolve relative includes.
JobTree parse(std::string_view text, const std::filesystem::path &base_path = {}, const ParseOptions &options = {});

/// Reads and parses a job file.
JobTree parse_file(const std::filesystem::path &path, const ParseOptions &options = {});

/// Every diagnostic parse() would report; empty for a valid document.
std::vector<Diagnostic> validate(std::string_view text, const std::filesystem::path &base_path = {},
                                 const ParseOptions &options = {});

/// Canonical job document (includes already inlined).
std::string serialize_job(const JobTree &job);

std::string serialize_result(const JobTree &job, const Trace &trace);
std::string serialize_result(const JobTree &job, const Spectrum &spectrum);

struct ResultDocument {
    JobTree job;
    std::optional<Trace> trace;
    std::optional<Spectrum> spectrum;
    std::string engine;
};

ResultDocument parse_result(std::string_view text);

/// Shortest decimal text that reads back to the same double (<= 17
/// significant digits).
std::string format_number(double value);

}  // namespace qmlsim::qml
