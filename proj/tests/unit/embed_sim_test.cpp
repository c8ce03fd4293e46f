#include "memexplain/embed_sim.hpp"
#include "memexplain/error.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

using namespace memexplain;

TEST(EmbedSim, IdentityScoresOne) {
    const HashToyEmbedder e;
    const std::vector<std::string> t{"the meme mocks the leader", "قطة تجلس على لوحة المفاتيح"};
    EXPECT_NEAR(embed_sim_f1(t, t, e), 1.0, 1e-12);
}

TEST(EmbedSim, OrthogonalEmbedderDisjointIsZero) {
    const std::vector<std::string> c{"alpha beta"}, r{"gamma delta epsilon"};
    std::vector<std::string> all = c;
    all.insert(all.end(), r.begin(), r.end());
    const auto e = OrthogonalToyEmbedder::from_texts(all);
    EXPECT_EQ(embed_sim_f1(c, r, e), 0.0);
    EXPECT_NEAR(embed_sim_f1(c, c, e), 1.0, 1e-12);
    const std::vector<std::string> unknown{"zeta"};
    EXPECT_THROW(embed_sim_f1(unknown, r, e), ValidationError);
}

TEST(EmbedSim, RandomPairsMatchBruteForce) {
    const HashToyEmbedder e(16, 99);
    std::mt19937_64 rng(77);
    const std::vector<std::string> vocab{"a", "b", "c", "meme", "leader", "clown", "جماعة", "دعاية", "x", "y"};
    auto random_text = [&] {
        std::string s;
        const std::size_t n = 1 + rng() % 8;
        for (std::size_t i = 0; i < n; ++i) s += vocab[rng() % vocab.size()] + " ";
        return s;
    };
    for (int i = 0; i < 50; ++i) {
        const std::string c = random_text(), r = random_text();
        const auto ce = e.embed(c), re = e.embed(r);
        const double expected = testsupport::brute_sim_f1(ce, re);
        const std::vector<std::string> cs{c}, rs{r};
        ASSERT_NEAR(embed_sim_f1(cs, rs, e), expected, 1e-12) << c << " | " << r;
        ASSERT_NEAR(embed_sim_pair(ce, re).f1, expected, 1e-12);
    }
}

TEST(EmbedSim, CorpusIsMeanOfPairs) {
    const HashToyEmbedder e;
    const std::vector<std::string> c{"a b", "c d e"}, r{"a x", "e"};
    const double p0 = embed_sim_pair(e.embed(c[0]), e.embed(r[0])).f1;
    const double p1 = embed_sim_pair(e.embed(c[1]), e.embed(r[1])).f1;
    EXPECT_NEAR(embed_sim_f1(c, r, e), (p0 + p1) / 2, 1e-15);
}

TEST(EmbedSim, InputErrors) {
    const HashToyEmbedder e;
    const std::vector<std::string> none, one{"a"}, two{"a", "b"}, empty{"  "};
    EXPECT_THROW(embed_sim_f1(none, none, e), ValidationError);
    EXPECT_THROW(embed_sim_f1(one, two, e), ValidationError);
    EXPECT_THROW(embed_sim_f1(empty, one, e), ValidationError);
}

TEST(EmbedSim, PrecomputedEmbedderLooksUpByText) {
    testsupport::TempDir dir;
    std::ofstream(dir / "v.jsonl") << R"({"text": "hello", "vectors": [[1, 0]]})" << "\n"
                                   << R"({"text": "bye", "vectors": [[0, 1]]})" << "\n";
    const PrecomputedEmbedder e(dir / "v.jsonl", "enc");
    EXPECT_EQ(e.name(), "enc");
    const std::vector<std::string> a{"hello"}, b{"bye"};
    EXPECT_NEAR(embed_sim_f1(a, a, e), 1.0, 1e-12);
    EXPECT_NEAR(embed_sim_f1(a, b, e), 0.0, 1e-12);
    EXPECT_THROW(e.embed("unseen"), ValidationError);
}
