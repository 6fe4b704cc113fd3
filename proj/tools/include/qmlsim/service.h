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

#ifndef QMLSIM_SERVICE_H
#define QMLSIM_SERVICE_H

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qmlsim/engine.h"

namespace httplib {
class Server;
}

namespace qmlsim::service {

enum class Status { Queued, Running, Done, Failed };
std::string_view status_name(Status status);

struct JobEntry {
    std::string id;  // 32 lowercase hex digits
    Status status = Status::Queued;
    std::uint64_t sequence = 0;  // submission order
    std::string submitted_at;    // ISO-8601 UTC
    std::string finished_at;
    std::uint64_t seed = 0;
    std::uint64_t estimate_bytes = 0;
    std::string engine;
    std::string error;
};

struct Config {
    std::filesystem::path data_dir = "qmlsim-data";
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    int workers = 1;  // 0 disables execution (jobs stay queued)
    std::size_t max_body_bytes = 16 << 20;
    engine::Limits limits;
    qml::ParseOptions parse;  // include_root for submitted documents
};

struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

class Service {
   public:
    /// Loads the store under data_dir; queued and interrupted jobs are
    /// re-queued in submission order. Workers start immediately.
    explicit Service(Config config);
    ~Service();

    Service(const Service &) = delete;
    Service &operator=(const Service &) = delete;

    /// Transport-independent request dispatch.
    Response handle(const std::string &method, const std::string &path, const std::string &body);

    /// Binds to config.host/port and serves on a background thread. Returns the bound port.
    int start_http();
    /// Blocks serving HTTP until stop().
    void serve_forever(const std::function<void(int)> &on_bound = {});
    void stop();

    /// Waits until no job is queued or running.
    void wait_idle();

    std::optional<JobEntry> entry(const std::string &id) const;
    std::filesystem::path job_dir(const std::string &id) const;

   private:
    Response submit(const std::string &body);
    Response status_of(const std::string &id) const;
    Response result_of(const std::string &id) const;
    Response list() const;
    Response remove(const std::string &id);

    int bind_http();
    void load_store();
    void write_meta(const JobEntry &entry) const;
    void worker_loop();
    void execute(JobEntry snapshot);

    Config config_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::condition_variable idle_cv_;
    std::map<std::string, JobEntry> entries_;
    std::deque<std::string> queue_;
    std::uint64_t next_sequence_ = 1;
    int running_ = 0;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
    std::unique_ptr<httplib::Server> server_;
    std::thread http_thread_;
};

/// Parses a meta file ("key=value" lines).
JobEntry parse_meta(const std::string &text);
std::string format_meta(const JobEntry &entry);

}  // namespace qmlsim::service

#endif
