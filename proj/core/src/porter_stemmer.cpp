#include "memexplain/porter_stemmer.hpp"

#include <functional>
#include <map>
#include <vector>

namespace memexplain {

namespace {

bool is_vowel_char(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool ends_with(std::string_view w, std::string_view suffix) {
    return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

std::string drop(std::string_view w, std::size_t n) { return std::string(w.substr(0, w.size() - n)); }

struct Rule {
    std::string_view suffix;  ///< "*d" marks the double-consonant rule
    std::string replacement;
    std::function<bool(const std::string&)> condition;  ///< empty: unconditional
};

}  // namespace

bool PorterStemmer::is_consonant(std::string_view w, std::size_t i) const {
    if (is_vowel_char(w[i])) return false;
    if (w[i] == 'y') {
        bool negate = false;
        while (i > 0 && w[i] == 'y') {
            negate = !negate;
            --i;
        }
        return (!is_vowel_char(w[i])) != negate;
    }
    return true;
}

int PorterStemmer::measure(std::string_view stem) const {
    // count of "vc" transitions in the consonant/vowel pattern
    int m = 0;
    bool prev_vowel = false;
    bool prev_consonant_flag = false;
    for (std::size_t i = 0; i < stem.size(); ++i) {
        bool consonant;
        if (is_vowel_char(stem[i])) {
            consonant = false;
        } else if (stem[i] == 'y') {
            consonant = (i == 0) ? true : !prev_consonant_flag;
        } else {
            consonant = true;
        }
        if (consonant && prev_vowel) ++m;
        prev_vowel = !consonant;
        prev_consonant_flag = consonant;
    }
    return m;
}

bool PorterStemmer::contains_vowel(std::string_view stem) const {
    bool prev = false;
    for (std::size_t i = 0; i < stem.size(); ++i) {
        bool consonant;
        if (is_vowel_char(stem[i])) {
            consonant = false;
        } else if (stem[i] == 'y') {
            consonant = (i == 0) ? true : !prev;
        } else {
            consonant = true;
        }
        if (!consonant) return true;
        prev = consonant;
    }
    return false;
}

bool PorterStemmer::ends_double_consonant(std::string_view w) const {
    return w.size() >= 2 && w[w.size() - 1] == w[w.size() - 2] && is_consonant(w, w.size() - 1);
}

bool PorterStemmer::ends_cvc(std::string_view w) const {
    const std::size_t n = w.size();
    if (n >= 3 && is_consonant(w, n - 3) && !is_consonant(w, n - 2) && is_consonant(w, n - 1) &&
        w[n - 1] != 'w' && w[n - 1] != 'x' && w[n - 1] != 'y') {
        return true;
    }
    return mode_ == Mode::nltk_extensions && n == 2 && !is_consonant(w, 0) && is_consonant(w, 1);
}

namespace {

// First rule whose suffix matches decides: applied if its condition holds,
// otherwise the word is returned unchanged.
template <typename Stemmer>
std::string apply_rules(const Stemmer& s, const std::string& word, const std::vector<Rule>& rules,
                        bool (Stemmer::*ends_double)(std::string_view) const) {
    for (const auto& rule : rules) {
        if (rule.suffix == "*d" && (s.*ends_double)(word)) {
            const std::string stem = drop(word, 2);
            if (!rule.condition || rule.condition(stem)) return stem + rule.replacement;
            return word;
        }
        if (rule.suffix != "*d" && ends_with(word, rule.suffix)) {
            const std::string stem = drop(word, rule.suffix.size());
            if (!rule.condition || rule.condition(stem)) return stem + rule.replacement;
            return word;
        }
    }
    return word;
}

}  // namespace

#define MEMEXPLAIN_APPLY(word, ...) apply_rules(*this, word, std::vector<Rule>{__VA_ARGS__}, &PorterStemmer::ends_double_consonant)

std::string PorterStemmer::step1a(std::string w) const {
    if (mode_ == Mode::nltk_extensions && ends_with(w, "ies") && w.size() == 4) return drop(w, 3) + "ie";
    return MEMEXPLAIN_APPLY(w, {"sses", "ss", {}}, {"ies", "i", {}}, {"ss", "ss", {}}, {"s", "", {}});
}

std::string PorterStemmer::step1b(std::string w) const {
    if (mode_ == Mode::nltk_extensions && ends_with(w, "ied")) {
        return w.size() == 4 ? drop(w, 3) + "ie" : drop(w, 3) + "i";
    }
    if (ends_with(w, "eed")) {
        const std::string stem = drop(w, 3);
        return measure(stem) > 0 ? stem + "ee" : w;
    }
    std::string intermediate;
    bool succeeded = false;
    for (std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
        if (ends_with(w, suffix)) {
            intermediate = drop(w, suffix.size());
            if (contains_vowel(intermediate)) {
                succeeded = true;
                break;
            }
        }
    }
    if (!succeeded) return w;
    const char last = intermediate.empty() ? '\0' : intermediate.back();
    return MEMEXPLAIN_APPLY(intermediate, {"at", "ate", {}}, {"bl", "ble", {}}, {"iz", "ize", {}},
                            {"*d", std::string(1, last),
                             [last](const std::string&) { return last != 'l' && last != 's' && last != 'z'; }},
                            {"", "e", [this](const std::string& stem) { return measure(stem) == 1 && ends_cvc(stem); }});
}

std::string PorterStemmer::step1c(std::string w) const {
    if (mode_ == Mode::nltk_extensions) {
        return MEMEXPLAIN_APPLY(w, {"y", "i", [this](const std::string& stem) {
                                        return stem.size() > 1 && is_consonant(stem, stem.size() - 1);
                                    }});
    }
    return MEMEXPLAIN_APPLY(w, {"y", "i", [this](const std::string& stem) { return contains_vowel(stem); }});
}

std::string PorterStemmer::step2(std::string w) const {
    const auto positive = [this](const std::string& stem) { return measure(stem) > 0; };
    if (mode_ == Mode::nltk_extensions && ends_with(w, "alli") && positive(drop(w, 4))) {
        return step2(drop(w, 4) + "al");
    }
    std::vector<Rule> rules = {
        {"ational", "ate", positive},
        {"tional", "tion", positive},
        {"enci", "ence", positive},
        {"anci", "ance", positive},
        {"izer", "ize", positive},
        mode_ == Mode::original ? Rule{"abli", "able", positive} : Rule{"bli", "ble", positive},
        {"alli", "al", positive},
        {"entli", "ent", positive},
        {"eli", "e", positive},
        {"ousli", "ous", positive},
        {"ization", "ize", positive},
        {"ation", "ate", positive},
        {"ator", "ate", positive},
        {"alism", "al", positive},
        {"iveness", "ive", positive},
        {"fulness", "ful", positive},
        {"ousness", "ous", positive},
        {"aliti", "al", positive},
        {"iviti", "ive", positive},
        {"biliti", "ble", positive},
    };
    if (mode_ == Mode::nltk_extensions) {
        rules.push_back({"fulli", "ful", positive});
        const std::string whole = w;
        rules.push_back({"logi", "log", [this, whole](const std::string&) { return measure(drop(whole, 3)) > 0; }});
    }
    return apply_rules(*this, w, rules, &PorterStemmer::ends_double_consonant);
}

std::string PorterStemmer::step3(std::string w) const {
    const auto positive = [this](const std::string& stem) { return measure(stem) > 0; };
    return MEMEXPLAIN_APPLY(w, {"icate", "ic", positive}, {"ative", "", positive}, {"alize", "al", positive},
                            {"iciti", "ic", positive}, {"ical", "ic", positive}, {"ful", "", positive},
                            {"ness", "", positive});
}

std::string PorterStemmer::step4(std::string w) const {
    const auto gt1 = [this](const std::string& stem) { return measure(stem) > 1; };
    return MEMEXPLAIN_APPLY(
        w, {"al", "", gt1}, {"ance", "", gt1}, {"ence", "", gt1}, {"er", "", gt1}, {"ic", "", gt1},
        {"able", "", gt1}, {"ible", "", gt1}, {"ant", "", gt1}, {"ement", "", gt1}, {"ment", "", gt1},
        {"ent", "", gt1},
        {"ion", "", [this](const std::string& stem) {
             return measure(stem) > 1 && !stem.empty() && (stem.back() == 's' || stem.back() == 't');
         }},
        {"ou", "", gt1}, {"ism", "", gt1}, {"ate", "", gt1}, {"iti", "", gt1}, {"ous", "", gt1},
        {"ive", "", gt1}, {"ize", "", gt1});
}

std::string PorterStemmer::step5a(std::string w) const {
    if (ends_with(w, "e")) {
        const std::string stem = drop(w, 1);
        const int m = measure(stem);
        if (m > 1) return stem;
        if (m == 1 && !ends_cvc(stem)) return stem;
    }
    return w;
}

std::string PorterStemmer::step5b(std::string w) const {
    const std::string whole = w;
    return MEMEXPLAIN_APPLY(w, {"ll", "l", [this, whole](const std::string&) { return measure(drop(whole, 1)) > 1; }});
}

#undef MEMEXPLAIN_APPLY

std::string PorterStemmer::stem(std::string_view word) const {
    std::string w(word);
    for (char& c : w) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    if (mode_ == Mode::nltk_extensions) {
        static const std::map<std::string, std::string> irregular = {
            {"sky", "sky"},         {"skies", "sky"},     {"dying", "die"},      {"lying", "lie"},
            {"tying", "tie"},       {"news", "news"},     {"innings", "inning"}, {"inning", "inning"},
            {"outings", "outing"},  {"outing", "outing"}, {"cannings", "canning"}, {"canning", "canning"},
            {"howe", "howe"},       {"proceed", "proceed"}, {"exceed", "exceed"}, {"succeed", "succeed"},
        };
        if (const auto it = irregular.find(w); it != irregular.end()) return it->second;
        if (word.size() <= 2) return w;
    }
    if (w.empty()) return w;
    w = step1a(std::move(w));
    w = step1b(std::move(w));
    w = step1c(std::move(w));
    w = step2(std::move(w));
    w = step3(std::move(w));
    w = step4(std::move(w));
    w = step5a(std::move(w));
    w = step5b(std::move(w));
    return w;
}

}  // namespace memexplain
