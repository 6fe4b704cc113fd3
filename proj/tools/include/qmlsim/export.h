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

#ifndef QMLSIM_EXPORT_H
#define QMLSIM_EXPORT_H

#include <string>

#include "qmlsim/engine.h"

namespace qmlsim::io {

/// JSON mirror of a result document.
std::string trace_to_json(const qml::JobTree &job, const Trace &trace);
std::string spectrum_to_json(const qml::JobTree &job, const Spectrum &spectrum);

/// CSV with header "kind,step,id,v1,v2,v3": "base" rows carry (index, p, phase),
/// "bloch" rows (qubit, x, y, z), "entropy" rows (-, v), "outcome" rows
/// (targets, bits, p).
std::string trace_to_csv(const Trace &trace);
std::string spectrum_to_csv(const Spectrum &spectrum);

/// "key: value" lines with a stable field order.
std::string plan_to_text(const engine::EnginePlan &plan, std::uint64_t memory_cap);

}  // namespace qmlsim::io

#endif
