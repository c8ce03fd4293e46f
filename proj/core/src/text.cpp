#include "memexplain/text.hpp"

namespace memexplain::text {

std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    while (i < s.size()) {
        const unsigned char c = byte(i);
        std::size_t len = 0;
        char32_t cp = 0;
        if (c < 0x80) {
            len = 1;
            cp = c;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            out.push_back(char32_t{0xFFFD});
            ++i;
            continue;
        }
        if (i + len > s.size()) {
            out.push_back(char32_t{0xFFFD});
            ++i;
            continue;
        }
        bool ok = true;
        for (std::size_t k = 1; k < len; ++k) {
            const unsigned char cc = byte(i + k);
            if ((cc & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (!ok) {
            out.push_back(char32_t{0xFFFD});
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : s) {
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
    return out;
}

bool is_unicode_space(char32_t c) noexcept {
    switch (c) {
        case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
        case 0x1C: case 0x1D: case 0x1E: case 0x1F:
        case 0x85: case 0xA0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return c >= 0x2000 && c <= 0x200A;
    }
}

bool is_unicode_punct(char32_t c) noexcept {
    if (c < 0x80) {
        return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
               (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
    }
    switch (c) {
        // Latin-1 punctuation and symbols commonly used as punctuation.
        case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
        // Arabic comma, semicolon, question mark, percent, decimal/thousands, full stop.
        case 0x060C: case 0x060D: case 0x061B: case 0x061E: case 0x061F:
        case 0x066A: case 0x066B: case 0x066C: case 0x066D: case 0x06D4:
            return true;
        default:
            break;
    }
    return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
           (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) ||
           (c >= 0xFE10 && c <= 0xFE19) || (c >= 0xFE30 && c <= 0xFE4F) ||
           (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
           (c >= 0xFF3B && c <= 0xFF3D) || c == 0xFF3F || c == 0xFF5B || c == 0xFF5D;
}

std::vector<std::string> split_words(std::string_view s) {
    std::vector<std::string> words;
    std::u32string current;
    for (char32_t c : decode_utf8(s)) {
        if (is_unicode_space(c)) {
            if (!current.empty()) {
                words.push_back(encode_utf8(current));
                current.clear();
            }
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) words.push_back(encode_utf8(current));
    return words;
}

std::size_t count_words(std::string_view s) {
    std::size_t n = 0;
    bool in_word = false;
    for (char32_t c : decode_utf8(s)) {
        if (is_unicode_space(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++n;
        }
    }
    return n;
}

std::vector<std::string> metric_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    std::u32string current;
    const auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(encode_utf8(current));
            current.clear();
        }
    };
    for (char32_t c : decode_utf8(s)) {
        if (is_unicode_space(c)) {
            flush();
        } else if (is_unicode_punct(c)) {
            flush();
            tokens.push_back(encode_utf8(std::u32string(1, c)));
        } else {
            current.push_back(c);
        }
    }
    flush();
    return tokens;
}

std::string to_lower(std::string_view s) {
    std::u32string cps = decode_utf8(s);
    for (char32_t& c : cps) {
        if (c >= U'A' && c <= U'Z') {
            c += 0x20;
        } else if ((c >= 0xC0 && c <= 0xDE && c != 0xD7)) {
            c += 0x20;
        } else if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) {
            c += 0x20;
        } else if (c >= 0x410 && c <= 0x42F) {
            c += 0x20;
        } else if (c >= 0x400 && c <= 0x40F) {
            c += 0x50;
        }
    }
    return encode_utf8(cps);
}

std::string trim(std::string_view s) {
    const auto cps = decode_utf8(s);
    std::size_t b = 0;
    std::size_t e = cps.size();
    while (b < e && is_unicode_space(cps[b])) ++b;
    while (e > b && is_unicode_space(cps[e - 1])) --e;
    return encode_utf8(std::u32string_view(cps).substr(b, e - b));
}

}  // namespace memexplain::text
