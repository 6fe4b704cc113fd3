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

#include "qmlsim/service.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <mutex>
#include <random>

#include "helpers.h"
#include "qmlsim/engine.h"
#include "qmlsim/errors.h"
#include "qmlsim/qml.h"

// httplib pulls in <resolv.h>, whose macros clash with Eigen; keep it last.
#include "httplib.h"
#include "json.hpp"

using namespace qmlsim;
using namespace qmlsim::service;
namespace fs = std::filesystem;
using nlohmann::json;
using testing_support::read_text;
using testing_support::source_dir;

namespace {

const char *kBell = R"(<qml version="1.0"><job type="circuit" nqubits="2" seed="7">
<step><gate kind="H" targets="1"/></step><step><gate kind="CNOT" controls="1" targets="2"/></step></job></qml>)";

class ServiceTest : public ::testing::Test {
   protected:
    void SetUp() override {
        std::random_device rd;
        dir_ = fs::temp_directory_path() / ("qmlsim-service-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(dir_);
    }
    void TearDown() override {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }
    Config config(int workers) const {
        Config c;
        c.data_dir = dir_;
        c.port = 0;
        c.workers = workers;
        return c;
    }
    static std::string submit_ok(Service &s, const std::string &body) {
        const Response r = s.handle("POST", "/jobs", body);
        EXPECT_EQ(r.status, 202) << r.body;
        return json::parse(r.body).at("id").get<std::string>();
    }
    static std::string status_of(Service &s, const std::string &id) {
        return json::parse(s.handle("GET", "/jobs/" + id, "").body).at("status").get<std::string>();
    }

    fs::path dir_;
};

std::mutex g_order_mutex;
std::vector<std::uint64_t> g_order;

// Records execution order for jobs carrying seeds in [900000, 900100).
void register_order_probe() {
    static std::once_flag once;
    std::call_once(once, [] {
        struct Probe final : engine::Engine {
            engine::RunOutcome execute(const qml::JobTree &, const engine::EnginePlan &plan,
                                       const engine::Limits &, const engine::RunOptions &options) override {
                {
                    std::lock_guard lock(g_order_mutex);
                    g_order.push_back(*options.seed);
                }
                engine::RunOutcome out;
                out.trace = Trace{};
                out.trace->engine = plan.engine_id;
                out.trace->seed = *options.seed;
                return out;
            }
        };
        engine::register_engine(engine::EngineDescriptor{
            "order-probe",
            [](const qml::JobTree &job, const engine::Limits &) {
                return job.options.seed && *job.options.seed >= 900000 && *job.options.seed < 900100;
            },
            [](const qml::JobTree &, const engine::Limits &) { return std::uint64_t{64}; },
            [](const qml::JobTree &) { return std::uint64_t{1}; },
            [] { return std::make_unique<Probe>(); }});
    });
}

std::string seeded_job(std::uint64_t seed) {
    return R"(<qml version="1.0"><job type="circuit" nqubits="1" seed=")" + std::to_string(seed) +
           R"("><step><gate kind="X" targets="1"/></step></job></qml>)";
}

}  // namespace

TEST_F(ServiceTest, SubmitStatusResultLifecycle) {
    Service s(config(1));
    const Response submitted = s.handle("POST", "/jobs", kBell);
    ASSERT_EQ(submitted.status, 202) << submitted.body;
    const json j = json::parse(submitted.body);
    const std::string id = j.at("id");
    EXPECT_EQ(id.size(), 32u);
    EXPECT_EQ(j.at("plan").at("engine"), "state-engine");
    EXPECT_EQ(j.at("plan").at("memory_bytes"), 64u);
    EXPECT_EQ(j.at("seed"), 7u);

    s.wait_idle();
    const json status = json::parse(s.handle("GET", "/jobs/" + id, "").body);
    EXPECT_EQ(status.at("status"), "done");
    EXPECT_EQ(status.at("estimate_bytes"), 64u);
    EXPECT_FALSE(status.at("submitted_at").get<std::string>().empty());
    EXPECT_FALSE(status.at("finished_at").get<std::string>().empty());

    const Response result = s.handle("GET", "/jobs/" + id + "/result", "");
    ASSERT_EQ(result.status, 200);
    EXPECT_EQ(result.content_type, "application/xml");
    const qml::ResultDocument doc = qml::parse_result(result.body);
    ASSERT_TRUE(doc.trace.has_value());
    ASSERT_EQ(doc.trace->records.size(), 2u);
    EXPECT_NEAR(doc.trace->records[1].entropy, 1.0, 1e-12);

    // Re-running the stored job with its stored seed reproduces the stored result.
    const qml::JobTree stored = qml::parse(read_text(s.job_dir(id) / "job.qml"));
    const engine::Limits limits;
    const Trace rerun = *engine::run(stored, engine::configure(stored, limits), limits).trace;
    EXPECT_EQ(qml::serialize_result(stored, rerun), result.body);

    const json listing = json::parse(s.handle("GET", "/jobs", "").body);
    ASSERT_EQ(listing.at("jobs").size(), 1u);
    EXPECT_EQ(listing.at("jobs")[0].at("id"), id);
}

TEST_F(ServiceTest, MissingSeedIsFilledAndStored) {
    Service s(config(0));
    const std::string id = submit_ok(s, R"(<qml version="1.0"><job type="circuit" nqubits="1"/></qml>)");
    const qml::JobTree stored = qml::parse(read_text(s.job_dir(id) / "job.qml"));
    ASSERT_TRUE(stored.options.seed.has_value());
    EXPECT_EQ(*stored.options.seed, s.entry(id)->seed);
}

TEST_F(ServiceTest, InvalidDocumentIs400WithLocation) {
    Service s(config(0));
    const Response r = s.handle("POST", "/jobs", "<qml version=\"1.0\">\n  <job type=\"circuit\" nqubits=\"1\">\n</qml>");
    EXPECT_EQ(r.status, 400);
    const json j = json::parse(r.body);
    ASSERT_FALSE(j.at("diagnostics").empty());
    EXPECT_GE(j.at("diagnostics")[0].at("line").get<int>(), 1);
    EXPECT_GE(j.at("diagnostics")[0].at("column").get<int>(), 1);

    const Response unknown = s.handle("POST", "/jobs", read_text(source_dir() / "tests/data/qml/invalid/unknown_gate.qml"));
    EXPECT_EQ(unknown.status, 400);
    EXPECT_NE(unknown.body.find("HADAMAR"), std::string::npos);
    EXPECT_TRUE(json::parse(s.handle("GET", "/jobs", "").body).at("jobs").empty());
}

TEST_F(ServiceTest, OversizedJobIs413WithEstimate) {
    Config c = config(0);
    c.limits.memory_cap = std::uint64_t{4} << 30;
    Service s(c);
    const Response r =
        s.handle("POST", "/jobs", R"(<qml version="1.0"><job type="circuit" nqubits="31"><step><gate kind="H" targets="1"/></step></job></qml>)");
    EXPECT_EQ(r.status, 413);
    EXPECT_NE(r.body.find("34359738368"), std::string::npos);
    EXPECT_EQ(json::parse(r.body).at("estimate_bytes"), 34359738368u);
}

TEST_F(ServiceTest, OversizedBodyIs413) {
    Config c = config(0);
    c.max_body_bytes = 64;
    Service s(c);
    EXPECT_EQ(s.handle("POST", "/jobs", kBell).status, 413);
}

TEST_F(ServiceTest, UnknownIdsAre404) {
    Service s(config(0));
    EXPECT_EQ(s.handle("GET", "/jobs/0123456789abcdef0123456789abcdef", "").status, 404);
    EXPECT_EQ(s.handle("GET", "/jobs/0123456789abcdef0123456789abcdef/result", "").status, 404);
    EXPECT_EQ(s.handle("DELETE", "/jobs/0123456789abcdef0123456789abcdef", "").status, 404);
    EXPECT_EQ(s.handle("GET", "/jobs/../../etc", "").status, 404);
    EXPECT_EQ(s.handle("GET", "/jobs/not-an-id", "").status, 404);
}

TEST_F(ServiceTest, ResultOfQueuedJobIs409) {
    Service s(config(0));
    const std::string id = submit_ok(s, kBell);
    const Response r = s.handle("GET", "/jobs/" + id + "/result", "");
    EXPECT_EQ(r.status, 409);
    EXPECT_EQ(json::parse(r.body).at("status"), "queued");
}

TEST_F(ServiceTest, DeleteQueuedJobRemovesIt) {
    Service s(config(0));
    const std::string id = submit_ok(s, kBell);
    EXPECT_EQ(s.handle("DELETE", "/jobs/" + id, "").status, 200);
    EXPECT_EQ(s.handle("GET", "/jobs/" + id, "").status, 404);
    EXPECT_FALSE(fs::exists(s.job_dir(id)));
}

TEST(Meta, RoundTrips) {
    JobEntry e;
    e.id = "0123456789abcdef0123456789abcdef";
    e.status = Status::Failed;
    e.sequence = 12;
    e.submitted_at = "2026-01-02T03:04:05.006Z";
    e.finished_at = "2026-01-02T03:04:06.000Z";
    e.seed = 18446744073709551615u;
    e.estimate_bytes = 34359738368u;
    e.engine = "state-engine";
    e.error = "step 2: something went wrong";
    const JobEntry back = parse_meta(format_meta(e));
    EXPECT_EQ(back.id, e.id);
    EXPECT_EQ(back.status, e.status);
    EXPECT_EQ(back.sequence, e.sequence);
    EXPECT_EQ(back.submitted_at, e.submitted_at);
    EXPECT_EQ(back.finished_at, e.finished_at);
    EXPECT_EQ(back.seed, e.seed);
    EXPECT_EQ(back.estimate_bytes, e.estimate_bytes);
    EXPECT_EQ(back.engine, e.engine);
    EXPECT_EQ(back.error, e.error);
}

TEST_F(ServiceTest, DeleteOfRunningJobIs409) {
    register_order_probe();
    std::mutex gate;
    gate.lock();
    struct Blocker final : engine::Engine {
        std::mutex *gate;
        explicit Blocker(std::mutex *g) : gate(g) {}
        engine::RunOutcome execute(const qml::JobTree &, const engine::EnginePlan &plan, const engine::Limits &,
                                   const engine::RunOptions &) override {
            std::lock_guard hold(*gate);
            engine::RunOutcome out;
            out.trace = Trace{};
            out.trace->engine = plan.engine_id;
            return out;
        }
    };
    engine::register_engine(engine::EngineDescriptor{
        "blocking-probe",
        [](const qml::JobTree &job, const engine::Limits &) { return job.options.seed == std::uint64_t{777777}; },
        [](const qml::JobTree &, const engine::Limits &) { return std::uint64_t{64}; },
        [](const qml::JobTree &) { return std::uint64_t{1}; },
        [&gate] { return std::make_unique<Blocker>(&gate); }});

    Service s(config(1));
    const std::string id = submit_ok(s, seeded_job(777777));
    for (int i = 0; i < 2000 && status_of(s, id) != "running"; ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    ASSERT_EQ(status_of(s, id), "running");
    EXPECT_EQ(s.handle("DELETE", "/jobs/" + id, "").status, 409);
    EXPECT_EQ(s.handle("GET", "/jobs/" + id + "/result", "").status, 409);
    gate.unlock();
    s.wait_idle();
    EXPECT_EQ(status_of(s, id), "done");
    EXPECT_EQ(s.handle("DELETE", "/jobs/" + id, "").status, 200);
}

TEST_F(ServiceTest, FailedJobReportsError) {
    struct Failing final : engine::Engine {
        engine::RunOutcome execute(const qml::JobTree &, const engine::EnginePlan &, const engine::Limits &,
                                   const engine::RunOptions &) override {
            throw NumericError("step 1: probe failure");
        }
    };
    engine::register_engine(engine::EngineDescriptor{
        "failing-probe",
        [](const qml::JobTree &job, const engine::Limits &) { return job.options.seed == std::uint64_t{666666}; },
        [](const qml::JobTree &, const engine::Limits &) { return std::uint64_t{64}; },
        [](const qml::JobTree &) { return std::uint64_t{1}; },
        [] { return std::make_unique<Failing>(); }});
    Service s(config(1));
    const std::string id = submit_ok(s, seeded_job(666666));
    s.wait_idle();
    EXPECT_EQ(status_of(s, id), "failed");
    EXPECT_EQ(s.handle("GET", "/jobs/" + id + "/result", "").status, 409);
    EXPECT_EQ(json::parse(s.handle("GET", "/jobs/" + id, "").body).at("error"), "step 1: probe failure");
    EXPECT_FALSE(fs::exists(s.job_dir(id) / "result.qml"));
}

TEST_F(ServiceTest, RestartPreservesDoneAndRequeuesPending) {
    std::string done_id;
    std::string done_result;
    {
        Service s(config(1));
        done_id = submit_ok(s, kBell);
        s.wait_idle();
        done_result = s.handle("GET", "/jobs/" + done_id + "/result", "").body;
    }
    std::vector<std::string> pending;
    {
        Service s(config(0));
        EXPECT_EQ(status_of(s, done_id), "done");
        for (int i = 0; i < 3; ++i) {
            pending.push_back(submit_ok(s, kBell));
        }
    }
    // Simulate a crash in the middle of the second pending job.
    {
        JobEntry e = parse_meta(read_text(dir_ / "jobs" / pending[1] / "meta"));
        e.status = Status::Running;
        std::ofstream(dir_ / "jobs" / pending[1] / "meta", std::ios::trunc) << format_meta(e);
    }
    {
        Service s(config(0));
        EXPECT_EQ(status_of(s, pending[1]), "queued");
        EXPECT_EQ(s.handle("GET", "/jobs/" + done_id + "/result", "").body, done_result);
    }
    Service s(config(1));
    s.wait_idle();
    for (const std::string &id : pending) {
        EXPECT_EQ(status_of(s, id), "done");
    }
    EXPECT_EQ(s.handle("GET", "/jobs/" + done_id + "/result", "").body, done_result);
    EXPECT_EQ(json::parse(s.handle("GET", "/jobs", "").body).at("jobs").size(), 4u);
}

TEST_F(ServiceTest, SingleWorkerRunsInSubmissionOrder) {
    register_order_probe();
    {
        std::lock_guard lock(g_order_mutex);
        g_order.clear();
    }
    std::vector<std::uint64_t> seeds = {900007, 900003, 900011, 900001, 900005};
    {
        Service s(config(0));
        for (std::uint64_t seed : seeds) {
            submit_ok(s, seeded_job(seed));
        }
    }
    Service s(config(1));
    s.wait_idle();
    std::lock_guard lock(g_order_mutex);
    EXPECT_EQ(g_order, seeds);
}

TEST_F(ServiceTest, HttpTransport) {
    Service s(config(1));
    const int port = s.start_http();
    ASSERT_GT(port, 0);
    httplib::Client client("127.0.0.1", port);
    auto posted = client.Post("/jobs", kBell, "application/xml");
    ASSERT_TRUE(posted);
    EXPECT_EQ(posted->status, 202);
    const std::string id = json::parse(posted->body).at("id");
    s.wait_idle();
    auto status = client.Get("/jobs/" + id);
    ASSERT_TRUE(status);
    EXPECT_EQ(json::parse(status->body).at("status"), "done");
    auto result = client.Get("/jobs/" + id + "/result");
    ASSERT_TRUE(result);
    EXPECT_EQ(result->status, 200);
    EXPECT_NO_THROW(qml::parse_result(result->body));
    auto missing = client.Get("/jobs/ffffffffffffffffffffffffffffffff");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);
    auto bad = client.Post("/jobs", "<qml", "application/xml");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
    auto removed = client.Delete("/jobs/" + id);
    ASSERT_TRUE(removed);
    EXPECT_EQ(removed->status, 200);
    s.stop();
}
