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

#include <stdexcept>
#include <string>

namespace qmlsim {

/// Base class for every error raised by the library. The category maps onto
/// the command-line exit codes (1 = input, 2 = resource, 3 = numeric).
class Error : public std::runtime_error {
   public:
    enum class Category { Input = 1, Resource = 2, Numeric = 3 };

    Error(Category category, const std::string &message) : std::runtime_error(message), category_(category) {
    }

    Category category() const noexcept {
        return category_;
    }

   private:
    Category category_;
};

/// Malformed documents, invalid arguments, precondition violations.
class InputError : public Error {
   public:
    explicit InputError(const std::string &message) : Error(Category::Input, message) {
    }
};

/// A job or allocation would exceed a configured memory or size cap.
class ResourceError : public Error {
   public:
    explicit ResourceError(const std::string &message) : Error(Category::Resource, message) {
    }
};

/// Numerical inconsistency, e.g. measuring an outcome of zero probability.
class NumericError : public Error {
   public:
    explicit NumericError(const std::string &message) : Error(Category::Numeric, message) {
    }
};

/// Re-raises `e` with the same category and `prefix` prepended to the message.
[[noreturn]] void rethrow_with_prefix(const Error &e, const std::string &prefix);

}  // namespace qmlsim
