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

#include "qmlsim/errors.h"

namespace qmlsim {

void rethrow_with_prefix(const Error &e, const std::string &prefix) {
    const std::string message = prefix + e.what();
    switch (e.category()) {
        case Error::Category::Resource:
            throw ResourceError(message);
        case Error::Category::Numeric:
            throw NumericError(message);
        case Error::Category::Input:
            break;
    }
    throw InputError(message);
}

}  // namespace qmlsim
