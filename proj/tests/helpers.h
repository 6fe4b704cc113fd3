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

#ifndef QMLSIM_TESTS_HELPERS_H
#define QMLSIM_TESTS_HELPERS_H

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "oracles.h"
#include "qmlsim/statevec.h"

namespace testing_support {

inline oracle::V to_vec(const qmlsim::StateVector &s) {
    oracle::V v(static_cast<Eigen::Index>(s.dim()));
    for (std::size_t i = 0; i < s.dim(); ++i) {
        v(static_cast<Eigen::Index>(i)) = s[i];
    }
    return v;
}

inline qmlsim::StateVector from_vec(const oracle::V &v) {
    return qmlsim::StateVector::from_amplitudes(std::vector<qmlsim::Complex>(v.data(), v.data() + v.size()));
}

inline double max_diff(const oracle::V &a, const oracle::V &b) {
    return (a - b).cwiseAbs().maxCoeff();
}

inline std::string read_text(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::filesystem::path source_dir() {
    return QMLSIM_SOURCE_DIR;
}

}  // namespace testing_support

#endif
