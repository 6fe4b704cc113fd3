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

#include "qmlsim/xml.h"

#include <cstdint>

namespace qmlsim::xml {

namespace {

bool is_name_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':' ||
           static_cast<unsigned char>(c) >= 0x80;
}

bool is_name_char(char c) {
    return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

void append_utf8(std::string &out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

class Reader {
   public:
    explicit Reader(std::string_view text) : text_(text) {
    }

    Element document() {
        if (starts_with("\xEF\xBB\xBF")) {
            pos_ += 3;
        }
        skip_space();
        if (starts_with("<?xml")) {
            const std::size_t end = text_.find("?>", pos_);
            if (end == std::string_view::npos) {
                fail("unterminated XML declaration");
            }
            advance_to(end + 2);
        }
        skip_misc();
        if (at_end() || peek() != '<') {
            fail("expected root element");
        }
        Element root = element();
        skip_misc();
        if (!at_end()) {
            fail("content after the root element");
        }
        return root;
    }

   private:
    [[noreturn]] void fail(const std::string &message) const {
        throw SyntaxError(message, here());
    }

    Location here() const {
        return Location{line_, column_};
    }
    bool at_end() const {
        return pos_ >= text_.size();
    }
    char peek() const {
        return text_[pos_];
    }
    bool starts_with(std::string_view s) const {
        return text_.substr(pos_, s.size()) == s;
    }

    void bump() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else if ((static_cast<unsigned char>(text_[pos_]) & 0xC0) != 0x80) {
            ++column_;
        }
        ++pos_;
    }
    void advance_to(std::size_t target) {
        while (pos_ < target) {
            bump();
        }
    }
    void expect(char c) {
        if (at_end() || peek() != c) {
            fail(std::string("expected '") + c + "'");
        }
        bump();
    }

    void skip_space() {
        while (!at_end() && is_space(peek())) {
            bump();
        }
    }

    void skip_misc() {
        for (;;) {
            skip_space();
            if (starts_with("<!--")) {
                comment();
            } else {
                return;
            }
        }
    }

    void comment() {
        const std::size_t end = text_.find("-->", pos_ + 4);
        if (end == std::string_view::npos) {
            fail("unterminated comment");
        }
        advance_to(end + 3);
    }

    std::string name() {
        if (at_end() || !is_name_start(peek())) {
            fail("expected a name");
        }
        const std::size_t start = pos_;
        while (!at_end() && is_name_char(peek())) {
            bump();
        }
        return std::string(text_.substr(start, pos_ - start));
    }

    std::string attribute_value() {
        if (at_end() || (peek() != '"' && peek() != '\'')) {
            fail("expected a quoted attribute value");
        }
        const char quote = peek();
        bump();
        std::string value;
        for (;;) {
            if (at_end()) {
                fail("unterminated attribute value");
            }
            const char c = peek();
            if (c == quote) {
                bump();
                return value;
            }
            if (c == '<') {
                fail("'<' inside attribute value");
            }
            if (c == '&') {
                entity(value);
                continue;
            }
            value.push_back(c);
            bump();
        }
    }

    void entity(std::string &out) {
        const Location start = here();
        const std::size_t semi = text_.find(';', pos_);
        if (semi == std::string_view::npos || semi - pos_ > 10) {
            throw SyntaxError("malformed entity reference", start);
        }
        const std::string_view ref = text_.substr(pos_ + 1, semi - pos_ - 1);
        if (ref == "lt") {
            out.push_back('<');
        } else if (ref == "gt") {
            out.push_back('>');
        } else if (ref == "amp") {
            out.push_back('&');
        } else if (ref == "quot") {
            out.push_back('"');
        } else if (ref == "apos") {
            out.push_back('\'');
        } else if (ref.size() > 1 && ref[0] == '#') {
            std::uint32_t cp = 0;
            const bool hex = ref[1] == 'x';
            const std::string_view digits = ref.substr(hex ? 2 : 1);
            if (digits.empty()) {
                throw SyntaxError("malformed character reference", start);
            }
            for (char d : digits) {
                int v = -1;
                if (d >= '0' && d <= '9') {
                    v = d - '0';
                } else if (hex && d >= 'a' && d <= 'f') {
                    v = d - 'a' + 10;
                } else if (hex && d >= 'A' && d <= 'F') {
                    v = d - 'A' + 10;
                }
                if (v < 0) {
                    throw SyntaxError("malformed character reference", start);
                }
                cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
                if (cp > 0x10FFFF) {
                    throw SyntaxError("character reference out of range", start);
                }
            }
            append_utf8(out, cp);
        } else {
            throw SyntaxError("unknown entity '&" + std::string(ref) + ";'", start);
        }
        advance_to(semi + 1);
    }

    Element element() {
        Element el;
        el.location = here();
        expect('<');
        el.name = name();
        for (;;) {
            const bool had_space = !at_end() && is_space(peek());
            skip_space();
            if (at_end()) {
                fail("unterminated start tag <" + el.name + ">");
            }
            if (starts_with("/>")) {
                bump();
                bump();
                return el;
            }
            if (peek() == '>') {
                bump();
                break;
            }
            if (!had_space) {
                fail("expected whitespace before attribute");
            }
            Attribute attr;
            attr.location = here();
            attr.name = name();
            skip_space();
            expect('=');
            skip_space();
            attr.value = attribute_value();
            if (el.find(attr.name)) {
                throw SyntaxError("duplicate attribute '" + attr.name + "'", attr.location);
            }
            el.attributes.push_back(std::move(attr));
        }
        for (;;) {
            skip_space();
            if (at_end()) {
                fail("missing end tag </" + el.name + ">");
            }
            if (starts_with("<!--")) {
                comment();
            } else if (starts_with("</")) {
                bump();
                bump();
                const Location at = here();
                const std::string closing = name();
                if (closing != el.name) {
                    throw SyntaxError("mismatched end tag </" + closing + "> for <" + el.name + ">", at);
                }
                skip_space();
                expect('>');
                return el;
            } else if (starts_with("<![CDATA[") || starts_with("<!")) {
                fail("CDATA and declarations are not supported");
            } else if (starts_with("<?")) {
                fail("processing instructions are not supported");
            } else if (peek() == '<') {
                el.children.push_back(element());
            } else {
                fail("unexpected text content in <" + el.name + ">");
            }
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

}  // namespace

const Attribute *Element::find(std::string_view attr) const {
    for (const Attribute &a : attributes) {
        if (a.name == attr) {
            return &a;
        }
    }
    return nullptr;
}

Element parse(std::string_view text) {
    return Reader(text).document();
}

std::string escape(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        switch (c) {
            case '&':
                out += "&amp;";
                break;
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            case '"':
                out += "&quot;";
                break;
            case '\'':
                out += "&apos;";
                break;
            default:
                out.push_back(c);
        }
    }
    return out;
}

void write(const Element &element, std::string &out, int depth) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += '<';
    out += element.name;
    for (const Attribute &a : element.attributes) {
        out += ' ';
        out += a.name;
        out += "=\"";
        out += escape(a.value);
        out += '"';
    }
    if (element.children.empty()) {
        out += "/>\n";
        return;
    }
    out += ">\n";
    for (const Element &child : element.children) {
        write(child, out, depth + 1);
    }
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += "</";
    out += element.name;
    out += ">\n";
}

}  // namespace qmlsim::xml
