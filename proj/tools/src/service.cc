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

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

namespace qmlsim::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string now_iso() {
    using namespace std::chrono;
    const auto now = system_clock::now();
    const std::time_t secs = system_clock::to_time_t(now);
    const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof(out), "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

std::string random_id() {
    std::random_device rd;
    std::ostringstream out;
    for (int i = 0; i < 4; ++i) {
        char buf[9];
        std::snprintf(buf, sizeof(buf), "%08x", static_cast<unsigned>(rd()));
        out << buf;
    }
    return out.str();
}

std::uint64_t random_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string read_file(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + p.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Write-then-rename so a crash never leaves a truncated document.
void write_file(const fs::path &p, const std::string &text) {
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
    }
    fs::rename(tmp, p);
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

json entry_json(const JobEntry &e) {
    json j;
    j["id"] = e.id;
    j["status"] = std::string(status_name(e.status));
    j["submitted_at"] = e.submitted_at;
    j["finished_at"] = e.finished_at.empty() ? json(nullptr) : json(e.finished_at);
    j["estimate_bytes"] = e.estimate_bytes;
    j["seed"] = e.seed;
    j["engine"] = e.engine;
    if (!e.error.empty()) {
        j["error"] = e.error;
    }
    return j;
}

Response json_response(int status, const json &body) {
    return Response{status, "application/json", body.dump() + "\n"};
}

Response error_response(int status, const std::string &message) {
    return json_response(status, json{{"error", message}});
}

const std::regex kIdPattern("[0-9a-f]{32}");

}  // namespace

std::string_view status_name(Status status) {
    switch (status) {
        case Status::Queued:
            return "queued";
        case Status::Running:
            return "running";
        case Status::Done:
            return "done";
        case Status::Failed:
            return "failed";
    }
    return "queued";
}

std::string format_meta(const JobEntry &e) {
    std::ostringstream out;
    out << "id=" << e.id << '\n';
    out << "status=" << status_name(e.status) << '\n';
    out << "sequence=" << e.sequence << '\n';
    out << "submitted_at=" << e.submitted_at << '\n';
    out << "finished_at=" << e.finished_at << '\n';
    out << "seed=" << e.seed << '\n';
    out << "estimate_bytes=" << e.estimate_bytes << '\n';
    out << "engine=" << e.engine << '\n';
    out << "error=" << one_line(e.error) << '\n';
    return out.str();
}

JobEntry parse_meta(const std::string &text) {
    JobEntry e;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            continue;
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "id") {
            e.id = value;
        } else if (key == "status") {
            e.status = value == "running" ? Status::Running
                       : value == "done"  ? Status::Done
                       : value == "failed" ? Status::Failed
                                          : Status::Queued;
        } else if (key == "sequence") {
            e.sequence = std::stoull(value);
        } else if (key == "submitted_at") {
            e.submitted_at = value;
        } else if (key == "finished_at") {
            e.finished_at = value;
        } else if (key == "seed") {
            e.seed = std::stoull(value);
        } else if (key == "estimate_bytes") {
            e.estimate_bytes = std::stoull(value);
        } else if (key == "engine") {
            e.engine = value;
        } else if (key == "error") {
            e.error = value;
        }
    }
    return e;
}

Service::Service(Config config) : config_(std::move(config)) {
    fs::create_directories(config_.data_dir / "jobs");
    load_store();
    for (int i = 0; i < config_.workers; ++i) {
        workers_.emplace_back([this] { worker_loop(); });
    }
}

Service::~Service() {
    stop();
}

fs::path Service::job_dir(const std::string &id) const {
    return config_.data_dir / "jobs" / id;
}

void Service::load_store() {
    std::vector<JobEntry> loaded;
    for (const auto &dir : fs::directory_iterator(config_.data_dir / "jobs")) {
        const fs::path meta = dir.path() / "meta";
        if (!dir.is_directory() || !fs::exists(meta) || !fs::exists(dir.path() / "job.qml")) {
            continue;
        }
        JobEntry e = parse_meta(read_file(meta));
        if (e.id != dir.path().filename().string()) {
            continue;
        }
        if (e.status == Status::Running) {
            // Interrupted by a shutdown: run again from scratch.
            e.status = Status::Queued;
            write_meta(e);
        }
        loaded.push_back(std::move(e));
    }
    std::sort(loaded.begin(), loaded.end(), [](const JobEntry &a, const JobEntry &b) { return a.sequence < b.sequence; });
    for (JobEntry &e : loaded) {
        next_sequence_ = std::max(next_sequence_, e.sequence + 1);
        if (e.status == Status::Queued) {
            queue_.push_back(e.id);
        }
        entries_.emplace(e.id, std::move(e));
    }
}

void Service::write_meta(const JobEntry &entry) const {
    write_file(job_dir(entry.id) / "meta", format_meta(entry));
}

Response Service::handle(const std::string &method, const std::string &path, const std::string &body) {
    if (path == "/jobs") {
        if (method == "POST") {
            return submit(body);
        }
        if (method == "GET") {
            return list();
        }
        return error_response(405, "method not allowed");
    }
    static const std::regex job_path("/jobs/([^/]+)(/result)?");
    std::smatch m;
    if (!std::regex_match(path, m, job_path)) {
        return error_response(404, "not found");
    }
    const std::string id = m[1];
    const bool result = m[2].matched;
    if (!std::regex_match(id, kIdPattern)) {
        return error_response(404, "unknown job " + id);
    }
    if (result) {
        return method == "GET" ? result_of(id) : error_response(405, "method not allowed");
    }
    if (method == "GET") {
        return status_of(id);
    }
    if (method == "DELETE") {
        return remove(id);
    }
    return error_response(405, "method not allowed");
}

Response Service::submit(const std::string &body) {
    if (body.size() > config_.max_body_bytes) {
        return error_response(413, "request body exceeds " + std::to_string(config_.max_body_bytes) + " bytes");
    }
    const fs::path base = config_.parse.include_root;
    const std::vector<qml::Diagnostic> diags = qml::validate(body, base, config_.parse);
    if (!diags.empty()) {
        json list = json::array();
        for (const auto &d : diags) {
            list.push_back({{"file", d.file}, {"line", d.line}, {"column", d.column}, {"message", d.message}});
        }
        return json_response(400, json{{"error", "invalid QML document"}, {"diagnostics", list}});
    }
    qml::JobTree job = qml::parse(body, base, config_.parse);
    engine::EnginePlan plan;
    try {
        plan = engine::configure(job, config_.limits);
    } catch (const ResourceError &e) {
        engine::Limits unlimited = config_.limits;
        unlimited.memory_cap = UINT64_MAX;
        json j{{"error", e.what()}};
        try {
            j["estimate_bytes"] = engine::configure(job, unlimited).memory_bytes;
        } catch (const Error &) {
        }
        return json_response(413, j);
    } catch (const Error &e) {
        return error_response(400, e.what());
    }

    JobEntry entry;
    entry.id = random_id();
    entry.seed = job.options.seed ? *job.options.seed : random_seed();
    job.options.seed = entry.seed;
    entry.estimate_bytes = plan.memory_bytes;
    entry.engine = plan.engine_id;
    entry.submitted_at = now_iso();
    {
        std::lock_guard lock(mutex_);
        entry.sequence = next_sequence_++;
        fs::create_directories(job_dir(entry.id));
        write_file(job_dir(entry.id) / "job.qml", qml::serialize_job(job));
        write_meta(entry);
        entries_.emplace(entry.id, entry);
        queue_.push_back(entry.id);
    }
    cv_.notify_one();
    json j = entry_json(entry);
    j["plan"] = {{"engine", plan.engine_id},
                 {"memory_bytes", plan.memory_bytes},
                 {"est_ops", plan.est_ops},
                 {"est_seconds", plan.est_seconds},
                 {"workers", plan.workers},
                 {"warnings", plan.warnings}};
    return json_response(202, j);
}

Response Service::status_of(const std::string &id) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) {
        return error_response(404, "unknown job " + id);
    }
    return json_response(200, entry_json(it->second));
}

Response Service::result_of(const std::string &id) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) {
        return error_response(404, "unknown job " + id);
    }
    if (it->second.status != Status::Done) {
        return json_response(409, entry_json(it->second));
    }
    return Response{200, "application/xml", read_file(job_dir(id) / "result.qml")};
}

Response Service::list() const {
    std::lock_guard lock(mutex_);
    std::vector<const JobEntry *> sorted;
    for (const auto &[id, e] : entries_) {
        sorted.push_back(&e);
    }
    std::sort(sorted.begin(), sorted.end(), [](auto *a, auto *b) { return a->sequence < b->sequence; });
    json j = json::array();
    for (const JobEntry *e : sorted) {
        j.push_back(entry_json(*e));
    }
    return json_response(200, json{{"jobs", j}});
}

Response Service::remove(const std::string &id) {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) {
        return error_response(404, "unknown job " + id);
    }
    if (it->second.status == Status::Running) {
        return json_response(409, entry_json(it->second));
    }
    const Status previous = it->second.status;
    queue_.erase(std::remove(queue_.begin(), queue_.end(), id), queue_.end());
    entries_.erase(it);
    fs::remove_all(job_dir(id));
    return json_response(200, json{{"id", id}, {"deleted", true}, {"was", std::string(status_name(previous))}});
}

void Service::worker_loop() {
    for (;;) {
        JobEntry snapshot;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            if (stopping_) {
                return;
            }
            const std::string id = queue_.front();
            queue_.pop_front();
            JobEntry &e = entries_.at(id);
            e.status = Status::Running;
            write_meta(e);
            snapshot = e;
            ++running_;
        }
        execute(std::move(snapshot));
        {
            std::lock_guard lock(mutex_);
            --running_;
        }
        idle_cv_.notify_all();
    }
}

void Service::execute(JobEntry snapshot) {
    std::string result;
    std::string error;
    try {
        const qml::JobTree job = qml::parse(read_file(job_dir(snapshot.id) / "job.qml"));
        const engine::EnginePlan plan = engine::configure(job, config_.limits);
        engine::RunOptions options;
        options.seed = snapshot.seed;
        const engine::RunOutcome outcome = engine::run(job, plan, config_.limits, options);
        result = outcome.trace ? qml::serialize_result(job, *outcome.trace) : qml::serialize_result(job, *outcome.spectrum);
    } catch (const std::exception &e) {
        error = e.what();
    }
    std::lock_guard lock(mutex_);
    auto it = entries_.find(snapshot.id);
    if (it == entries_.end()) {
        return;
    }
    JobEntry &entry = it->second;
    if (error.empty()) {
        write_file(job_dir(entry.id) / "result.qml", result);
        entry.status = Status::Done;
    } else {
        entry.status = Status::Failed;
        entry.error = one_line(error);
    }
    entry.finished_at = now_iso();
    write_meta(entry);
}

void Service::wait_idle() {
    std::unique_lock lock(mutex_);
    idle_cv_.wait(lock, [this] { return (queue_.empty() || workers_.empty()) && running_ == 0; });
}

std::optional<JobEntry> Service::entry(const std::string &id) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

namespace {

void install_routes(httplib::Server &server, Service &service) {
    auto forward = [&service](const httplib::Request &req, httplib::Response &res) {
        const Response r = service.handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    server.Post("/jobs", forward);
    server.Get("/jobs", forward);
    server.Get(R"(/jobs/[^/]+)", forward);
    server.Get(R"(/jobs/[^/]+/result)", forward);
    server.Delete(R"(/jobs/[^/]+)", forward);
}

}  // namespace

int Service::bind_http() {
    server_ = std::make_unique<httplib::Server>();
    server_->set_payload_max_length(config_.max_body_bytes);
    install_routes(*server_, *this);
    int port = config_.port;
    if (port == 0) {
        port = server_->bind_to_any_port(config_.host);
    } else if (!server_->bind_to_port(config_.host, port)) {
        port = -1;
    }
    if (port < 0) {
        throw ResourceError("cannot bind " + config_.host + ":" + std::to_string(config_.port));
    }
    return port;
}

int Service::start_http() {
    const int port = bind_http();
    http_thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port;
}

void Service::serve_forever(const std::function<void(int)> &on_bound) {
    const int port = bind_http();
    if (on_bound) {
        on_bound(port);
    }
    server_->listen_after_bind();
}

void Service::stop() {
    {
        std::lock_guard lock(mutex_);
        if (stopping_) {
            return;
        }
        stopping_ = true;
    }
    cv_.notify_all();
    if (server_) {
        server_->stop();
    }
    if (http_thread_.joinable() && http_thread_.get_id() != std::this_thread::get_id()) {
        http_thread_.join();
    }
    for (std::thread &t : workers_) {
        t.join();
    }
    workers_.clear();
}

}  // namespace qmlsim::service
