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

#include <string>
#include <string_view>
#include <vector>

#include "qmlsim/errors.h"

// Reader and writer for the XML subset QML uses: a single root element,
// attributes, nested elements, comments and an optional <?xml ...?> prolog.
// Character data other than whitespace, CDATA and DOCTYPE are rejected.
namespace qmlsim::xml {

struct Location {
    int line = 1;
    int column = 1;
};

struct Attribute {
    std::string name;
    std::string value;
    Location location;
};

struct Element {
    std::string name;
    std::vector<Attribute> attributes;
    std::vector<Element> children;
    Location location;

    const Attribute *find(std::string_view attr) const;
};

class SyntaxError : public InputError {
   public:
    SyntaxError(const std::string &message, Location where)
        : InputError(message), location_(where) {
    }
    Location location() const noexcept {
        return location_;
    }

   private:
    Location location_;
};

/// Parses a complete document and returns its root element.
Element parse(std::string_view text);

/// Escapes &, <, >, " and ' for use inside a double-quoted attribute.
std::string escape(std::string_view raw);

/// Serializes with two-space indentation, one element per line, attributes in
/// stored order. Elements without children are self-closing.
void write(const Element &element, std::string &out, int depth = 0);

}  // namespace qmlsim::xml
