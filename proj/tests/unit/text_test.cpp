#include "memexplain/text.hpp"

#include <gtest/gtest.h>

using namespace memexplain;

TEST(Text, SplitsOnUnicodeWhitespace) {
    // U+00A0 no-break space and U+3000 ideographic space both separate words.
    EXPECT_EQ(text::count_words("  a\tb c　d\n"), 4u);
    EXPECT_EQ(text::count_words(""), 0u);
    EXPECT_EQ(text::count_words("   "), 0u);
    EXPECT_EQ(text::split_words("عندما تنتظر  الراتب"),
              (std::vector<std::string>{"عندما", "تنتظر", "الراتب"}));
}

TEST(Text, MetricTokensSplitPunctuation) {
    EXPECT_EQ(text::metric_tokens("Hi, there!"), (std::vector<std::string>{"Hi", ",", "there", "!"}));
    EXPECT_EQ(text::metric_tokens("نعم، لا؟"), (std::vector<std::string>{"نعم", "،", "لا", "؟"}));
    EXPECT_EQ(text::metric_tokens("don't"), (std::vector<std::string>{"don", "'", "t"}));
}

TEST(Text, Utf8RoundTripAndInvalidBytes) {
    const std::string s = "Ärger مرحبا 😀";
    EXPECT_EQ(text::encode_utf8(text::decode_utf8(s)), s);
    const auto cps = text::decode_utf8(std::string("a\xff") + "b");
    ASSERT_EQ(cps.size(), 3u);
    EXPECT_EQ(cps[1], char32_t{0xFFFD});
}

TEST(Text, LowerAndTrim) {
    EXPECT_EQ(text::to_lower("Label: NOT Propaganda"), "label: not propaganda");
    EXPECT_EQ(text::to_lower("ÄÖÜ"), "äöü");
    EXPECT_EQ(text::to_lower("مرحبا"), "مرحبا");
    EXPECT_EQ(text::trim("  x y \n"), "x y");
}
