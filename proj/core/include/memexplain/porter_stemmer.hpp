#pragma once

#include <string>
#include <string_view>

namespace memexplain {

/// Porter suffix-stripping stemmer for lowercase English words.
///
/// `original` follows the 1980 algorithm as published; `nltk_extensions`
/// adds the irregular-form table and rule tweaks of NLTK's default mode,
/// which is the stemmer most METEOR implementations ship with.
class PorterStemmer {
public:
    enum class Mode { original, nltk_extensions };

    explicit PorterStemmer(Mode mode = Mode::nltk_extensions) : mode_(mode) {}

    std::string stem(std::string_view word) const;

    Mode mode() const noexcept { return mode_; }

private:
    bool is_consonant(std::string_view w, std::size_t i) const;
    int measure(std::string_view stem) const;
    bool contains_vowel(std::string_view stem) const;
    bool ends_double_consonant(std::string_view w) const;
    bool ends_cvc(std::string_view w) const;

    std::string step1a(std::string w) const;
    std::string step1b(std::string w) const;
    std::string step1c(std::string w) const;
    std::string step2(std::string w) const;
    std::string step3(std::string w) const;
    std::string step4(std::string w) const;
    std::string step5a(std::string w) const;
    std::string step5b(std::string w) const;

    Mode mode_;
};

}  // namespace memexplain
