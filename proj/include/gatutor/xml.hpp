#pragma once

// Minimal XML document reader and writer.
//
// Covers the subset used by behavior-graph files: a prolog, comments,
// elements with attributes, character data, CDATA sections, and the five
// predefined entities plus numeric character references. DOCTYPE
// declarations and processing instructions after the prolog are rejected.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gatutor::xml {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct Attribute {
    std::string name;
    std::string value;
};

struct Element {
    std::string name;
    std::vector<Attribute> attributes;
    std::vector<Element> children;
    std::string text;  // concatenated character data of direct children
    std::size_t line = 0;

    const std::string* attribute(std::string_view key) const {
        for (const auto& a : attributes)
            if (a.name == key) return &a.value;
        return nullptr;
    }
};

namespace detail {

inline bool is_name_start(char c) {
    auto u = static_cast<unsigned char>(c);
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':' || u >= 0x80;
}

inline bool is_name_char(char c) {
    return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

inline void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

class Reader {
public:
    explicit Reader(std::string_view src) : src_(src) {}

    Element document() {
        skip_bom();
        skip_misc(true);
        if (at_end()) fail("no root element");
        if (!starts_with("<") || starts_with("</")) fail("expected root element");
        Element root = element();
        skip_misc(false);
        if (!at_end()) fail("content after root element");
        return root;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }

    bool at_end() const { return pos_ >= src_.size(); }
    char peek() const { return at_end() ? '\0' : src_[pos_]; }
    bool starts_with(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

    char get() {
        if (at_end()) fail("unexpected end of input");
        char c = src_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }

    void advance(std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) get();
    }

    void expect(std::string_view s) {
        if (!starts_with(s)) fail("expected '" + std::string(s) + "'");
        advance(s.size());
    }

    void skip_space() {
        while (!at_end() && is_space(peek())) get();
    }

    void skip_bom() {
        if (starts_with("\xEF\xBB\xBF")) pos_ += 3;
    }

    // Skips whitespace, comments and (only before the root) the XML declaration.
    void skip_misc(bool prolog) {
        bool first = true;
        for (;;) {
            skip_space();
            if (starts_with("<!--")) {
                comment();
            } else if (starts_with("<?xml") && prolog && first) {
                auto end = src_.find("?>", pos_);
                if (end == std::string_view::npos) fail("unterminated XML declaration");
                advance(end + 2 - pos_);
            } else if (starts_with("<?")) {
                fail("processing instructions are not supported");
            } else if (starts_with("<!DOCTYPE")) {
                fail("DOCTYPE declarations are not supported");
            } else {
                return;
            }
            first = false;
        }
    }

    void comment() {
        expect("<!--");
        auto end = src_.find("-->", pos_);
        if (end == std::string_view::npos) fail("unterminated comment");
        advance(end + 3 - pos_);
    }

    std::string name() {
        if (!is_name_start(peek())) fail("expected a name");
        std::size_t begin = pos_;
        while (!at_end() && is_name_char(peek())) get();
        return std::string(src_.substr(begin, pos_ - begin));
    }

    void entity(std::string& out) {
        expect("&");
        auto semi = src_.find(';', pos_);
        if (semi == std::string_view::npos || semi - pos_ > 10) fail("malformed entity reference");
        std::string_view ref = src_.substr(pos_, semi - pos_);
        advance(ref.size() + 1);
        if (ref == "lt") out += '<';
        else if (ref == "gt") out += '>';
        else if (ref == "amp") out += '&';
        else if (ref == "quot") out += '"';
        else if (ref == "apos") out += '\'';
        else if (ref.size() > 1 && ref[0] == '#') {
            std::uint32_t cp = 0;
            bool hex = ref[1] == 'x';
            std::string_view digits = ref.substr(hex ? 2 : 1);
            if (digits.empty()) fail("malformed character reference");
            for (char c : digits) {
                int d;
                if (c >= '0' && c <= '9') d = c - '0';
                else if (hex && c >= 'a' && c <= 'f') d = c - 'a' + 10;
                else if (hex && c >= 'A' && c <= 'F') d = c - 'A' + 10;
                else fail("malformed character reference");
                cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(d);
                if (cp > 0x10FFFF) fail("character reference out of range");
            }
            append_utf8(out, cp);
        } else {
            fail("unknown entity '&" + std::string(ref) + ";'");
        }
    }

    std::string attribute_value() {
        char quote = peek();
        if (quote != '"' && quote != '\'') fail("expected quoted attribute value");
        get();
        std::string value;
        while (peek() != quote) {
            if (at_end()) fail("unterminated attribute value");
            if (peek() == '<') fail("'<' in attribute value");
            if (peek() == '&') entity(value);
            else value += get();
        }
        get();
        return value;
    }

    Element element() {
        Element el;
        el.line = line_;
        expect("<");
        el.name = name();
        for (;;) {
            bool had_space = is_space(peek());
            skip_space();
            if (starts_with("/>")) {
                advance(2);
                return el;
            }
            if (peek() == '>') {
                get();
                break;
            }
            if (!had_space) fail("expected whitespace before attribute");
            std::size_t attr_line = line_;
            std::string key = name();
            skip_space();
            expect("=");
            skip_space();
            std::string value = attribute_value();
            if (el.attribute(key)) throw ParseError(attr_line, "duplicate attribute '" + key + "'");
            el.attributes.push_back({std::move(key), std::move(value)});
        }
        content(el);
        return el;
    }

    void content(Element& el) {
        for (;;) {
            if (at_end()) fail("unterminated element <" + el.name + ">");
            if (starts_with("</")) {
                advance(2);
                std::string closing = name();
                if (closing != el.name)
                    fail("mismatched closing tag </" + closing + "> for <" + el.name + ">");
                skip_space();
                expect(">");
                return;
            }
            if (starts_with("<!--")) {
                comment();
            } else if (starts_with("<![CDATA[")) {
                advance(9);
                auto end = src_.find("]]>", pos_);
                if (end == std::string_view::npos) fail("unterminated CDATA section");
                std::size_t n = end - pos_;
                el.text.append(src_.substr(pos_, n));
                advance(n + 3);
            } else if (starts_with("<?") || starts_with("<!")) {
                fail("unsupported markup inside element");
            } else if (peek() == '<') {
                el.children.push_back(element());
            } else if (peek() == '&') {
                entity(el.text);
            } else {
                el.text += get();
            }
        }
    }
};

}  // namespace detail

inline Element parse(std::string_view text) { return detail::Reader(text).document(); }

inline std::string escape(std::string_view s, bool attribute) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += attribute ? "&quot;" : "\""; break;
            case '\n': out += attribute ? "&#10;" : "\n"; break;
            case '\t': out += attribute ? "&#9;" : "\t"; break;
            case '\r': out += "&#13;"; break;
            default: out += c;
        }
    }
    return out;
}

// Streaming writer producing two-space indented output.
class Writer {
public:
    Writer() { out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"; }

    void open(std::string_view name, const std::vector<std::pair<std::string, std::string>>& attrs) {
        start_tag(name, attrs);
        out_ += ">\n";
        ++depth_;
    }

    void close(std::string_view name) {
        --depth_;
        indent();
        out_ += "</";
        out_ += name;
        out_ += ">\n";
    }

    void empty(std::string_view name, const std::vector<std::pair<std::string, std::string>>& attrs) {
        start_tag(name, attrs);
        out_ += "/>\n";
    }

    void text_element(std::string_view name, std::string_view text) {
        indent();
        out_ += '<';
        out_ += name;
        out_ += '>';
        out_ += escape(text, false);
        out_ += "</";
        out_ += name;
        out_ += ">\n";
    }

    const std::string& str() const { return out_; }

private:
    std::string out_;
    int depth_ = 0;

    void indent() { out_.append(static_cast<std::size_t>(depth_) * 2, ' '); }

    void start_tag(std::string_view name, const std::vector<std::pair<std::string, std::string>>& attrs) {
        indent();
        out_ += '<';
        out_ += name;
        for (const auto& [k, v] : attrs) {
            out_ += ' ';
            out_ += k;
            out_ += "=\"";
            out_ += escape(v, true);
            out_ += '"';
        }
    }
};

}  // namespace gatutor::xml
