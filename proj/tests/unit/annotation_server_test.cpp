#include "memexplain/agreement.hpp"
#include "memexplain/annotation_server.hpp"
#include "memexplain/annotation_store.hpp"
#include "memexplain/error.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <fstream>
#include <thread>

using namespace memexplain;
using testsupport::TempDir;

namespace {

class ServerFixture : public ::testing::Test {
protected:
    void SetUp() override {
        std::filesystem::create_directories(dir_ / "images");
        std::ofstream(dir_ / "images" / "0.png", std::ios::binary) << "PNGDATA";
        std::vector<AnnotationTask> tasks;
        for (int i = 0; i < 2; ++i) {
            tasks.push_back({"it" + std::to_string(i), "images/" + std::to_string(i) + ".png", "Other", "expl",
                             Language::en, "g1"});
        }
        tasks.push_back({"evil", "../../etc/passwd", "Other", "x", Language::en, "g1"});
        store_ = std::make_unique<AnnotationStore>(tasks, std::set<std::string>{"ann-a", "ann-b"}, dir_ / "r.jsonl");
        server_ = std::make_unique<AnnotationServer>(
            *store_, AnnotationServerConfig{{{"tok-a", "ann-a"}, {"tok-b", "ann-b"}}, "admin-secret", dir_.path()});
        port_ = server_->bind_any_port("127.0.0.1");
        ASSERT_GT(port_, 0);
        thread_ = std::thread([this] { server_->listen_after_bind(); });
        server_->wait_until_ready();
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    }
    void TearDown() override {
        server_->stop();
        thread_.join();
    }

    static std::string rating_body(const std::string& item, int v = 4) {
        return json{{"item_id", item},
                    {"scores", {{"faithfulness", v}, {"clarity", v}, {"plausibility", v}, {"informativeness", v}}}}
            .dump();
    }

    TempDir dir_;
    std::unique_ptr<AnnotationStore> store_;
    std::unique_ptr<AnnotationServer> server_;
    std::unique_ptr<httplib::Client> client_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace

TEST_F(ServerFixture, NextTaskSubmitAndProgress) {
    auto res = client_->Get("/api/tasks/next?annotator=tok-a");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    const auto task = json::parse(res->body);
    EXPECT_EQ(task["item_id"], "it0");
    EXPECT_EQ(task["done"], false);
    EXPECT_EQ(task["guideline_ref"], "g1");

    res = client_->Post("/api/ratings?annotator=tok-a", rating_body("it0"), "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 201);
    EXPECT_EQ(json::parse(res->body)["progress"]["completed"], 1);

    res = client_->Post("/api/ratings", {{"X-Annotator-Token", "tok-a"}}, rating_body("it0"), "application/json");
    EXPECT_EQ(res->status, 409);

    res = client_->Get("/api/progress?annotator=tok-a");
    EXPECT_EQ(json::parse(res->body)["completed"], 1);
}

TEST_F(ServerFixture, ErrorStatuses) {
    EXPECT_EQ(client_->Get("/api/tasks/next?annotator=bad")->status, 401);
    EXPECT_EQ(client_->Post("/api/ratings?annotator=bad", rating_body("it0"), "application/json")->status, 401);
    EXPECT_EQ(client_->Post("/api/ratings?annotator=tok-a", "not json", "application/json")->status, 400);
    auto res = client_->Post("/api/ratings?annotator=tok-a", rating_body("it0", 7), "application/json");
    EXPECT_EQ(res->status, 400);
    EXPECT_EQ(json::parse(res->body)["field"], "scores.faithfulness");
    EXPECT_EQ(client_->Post("/api/ratings?annotator=tok-a", rating_body("zzz"), "application/json")->status, 404);
    EXPECT_EQ(client_->Post("/api/ratings?annotator=tok-a", rating_body("it1"), "application/json")->status, 403);
}

TEST_F(ServerFixture, ImagesServedAndTraversalBlocked) {
    auto res = client_->Get("/api/items/it0/image");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->body, "PNGDATA");
    EXPECT_EQ(res->get_header_value("Content-Type"), "image/png");
    EXPECT_EQ(client_->Get("/api/items/evil/image")->status, 404);
    EXPECT_EQ(client_->Get("/api/items/it1/image")->status, 404);
}

TEST_F(ServerFixture, ExportRequiresAdmin) {
    client_->Post("/api/ratings?annotator=tok-b", rating_body("it0", 2), "application/json");
    EXPECT_EQ(client_->Get("/api/export")->status, 401);
    EXPECT_EQ(client_->Get("/api/export?token=tok-a")->status, 401);
    auto res = client_->Get("/api/export", {{"Authorization", "Bearer admin-secret"}});
    ASSERT_EQ(res->status, 200);
    const auto row = json::parse(res->body.substr(0, res->body.find('\n')));
    EXPECT_EQ(row["annotator_id"], "ann-b");
    EXPECT_EQ(row["scores"]["clarity"], 2);
}

TEST(AnnotationServer, RejectsTokenForUnknownAnnotator) {
    TempDir dir;
    AnnotationStore store({}, {"ann-a"}, dir / "r.jsonl");
    const AnnotationServerConfig config{{{"t", "ghost"}}, "", dir.path()};
    EXPECT_THROW({ AnnotationServer server(store, config); }, ValidationError);
}

TEST(AnnotationServer, ThreeAnnotatorSessionReachesQuotaAndAggregates) {
    TempDir dir;
    std::vector<AnnotationTask> tasks;
    for (int i = 0; i < 5; ++i) tasks.push_back({"item" + std::to_string(i), "x.png", "Hateful", "e", Language::en, "g"});
    AnnotationStore store(tasks, {"a1", "a2", "a3"}, dir / "r.jsonl");
    AnnotationServer server(store, {{{"t1", "a1"}, {"t2", "a2"}, {"t3", "a3"}}, "adm", dir.path()});
    const int port = server.bind_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client client("127.0.0.1", port);

    // annotator k gives score (item + k) % 5 + 1 on every metric
    const std::vector<std::string> tokens{"t1", "t2", "t3"};
    for (int round = 0; round < 5; ++round) {
        for (int k = 0; k < 3; ++k) {
            auto res = client.Get(("/api/tasks/next?annotator=" + tokens[k]).c_str());
            ASSERT_EQ(res->status, 200);
            const auto task = json::parse(res->body);
            ASSERT_EQ(task["done"], false);
            const std::string item = task["item_id"];
            const int v = (std::stoi(item.substr(4)) + k) % 5 + 1;
            const json body{{"item_id", item},
                            {"scores", {{"faithfulness", v}, {"clarity", v}, {"plausibility", v}, {"informativeness", v}}}};
            ASSERT_EQ(client.Post(("/api/ratings?annotator=" + tokens[k]).c_str(), body.dump(), "application/json")->status,
                      201);
        }
    }
    EXPECT_EQ(json::parse(client.Get("/api/tasks/next?annotator=t1")->body)["done"], true);
    const auto progress = json::parse(client.Get("/api/progress?annotator=t2")->body);
    EXPECT_EQ(progress["full_items"], 5);

    const auto exported = client.Get("/api/export?token=adm");
    std::vector<AnnotationRating> ratings;
    for (const auto& row : parse_jsonl(exported->body)) ratings.push_back(rating_from_json(row));
    server.stop();
    t.join();
    ASSERT_EQ(ratings.size(), 15u);
    const auto rep = aggregate(ratings);
    // item means by hand: items 0,1,2 -> 2,3,4; item 3 -> (4+5+1)/3; item 4 -> (5+1+2)/3
    const double mean = (2.0 + 3.0 + 4.0 + 10.0 / 3 + 8.0 / 3) / 5;
    EXPECT_NEAR(rep.metrics.at(LikertMetric::clarity).mean, mean, 1e-12);
    // S^2 is 1 for the first three items and 13/3 for the last two (max variance 4)
    const double rwg = (3 * 0.75 + 2 * (1 - (13.0 / 3) / 4)) / 5;
    EXPECT_NEAR(rep.metrics.at(LikertMetric::faithfulness).rwg_mean, rwg, 1e-12);
    EXPECT_EQ(rep.complete_items, 5u);
}
