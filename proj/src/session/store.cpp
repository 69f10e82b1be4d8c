#include "pcqa/session/store.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

#include <unistd.h>

#include "pcqa/util/csv.hpp"
#include "pcqa/util/errors.hpp"

namespace pcqa {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double wall_clock_ms() {
    using namespace std::chrono;
    return static_cast<double>(duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count());
}

double number_field(const json& j, const char* key, double fallback) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_number()) throw ValidationError(std::string("\"") + key + "\" must be a number");
    return it->get<double>();
}

std::string string_field(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (!it->is_string()) throw ValidationError(std::string("\"") + key + "\" must be a string");
    return it->get<std::string>();
}

}  // namespace

TrialRecord trial_record_from_json(const json& j, const std::string& session) {
    if (!j.is_object()) throw ValidationError("vote body must be a JSON object");
    TrialRecord r;
    r.session = session;
    const auto idx = j.find("trial_index");
    if (idx == j.end() || !idx->is_number_unsigned()) throw ValidationError("\"trial_index\" must be a non-negative integer");
    r.trial_index = idx->get<std::size_t>();
    r.left = string_field(j, "left");
    r.right = string_field(j, "right");
    const auto resp = j.find("response");
    if (resp == j.end()) throw ValidationError("missing \"response\"");
    if (resp->is_number_integer())
        r.response = std::to_string(resp->get<long long>());
    else if (resp->is_string())
        r.response = resp->get<std::string>();
    else
        throw ValidationError("\"response\" must be a score or a choice");
    r.latency_ms = number_field(j, "latency_ms", 0.0);
    r.started_at_ms = number_field(j, "started_at_ms", 0.0);
    r.answered_at_ms = number_field(j, "answered_at_ms", 0.0);
    return r;
}

json to_json(const TrialRecord& r) {
    return {{"session", r.session},         {"trial_index", r.trial_index},       {"left", r.left},
            {"right", r.right},             {"response", r.response},             {"latency_ms", r.latency_ms},
            {"started_at_ms", r.started_at_ms}, {"answered_at_ms", r.answered_at_ms}, {"received_at_ms", r.received_at_ms},
            {"flags", r.flags}};
}

namespace {

TrialRecord record_from_log(const json& j) {
    TrialRecord r = trial_record_from_json(j, j.at("session").get<std::string>());
    r.received_at_ms = j.value("received_at_ms", 0.0);
    r.flags = j.value("flags", std::vector<std::string>{});
    return r;
}

}  // namespace

ExportFiles export_records(const ExperimentPlan& plan, const std::vector<TrialRecord>& records, ExportFiles into) {
    if (into.dsis_csv.empty()) into.dsis_csv = "subject_id,stimulus_id,score\n";
    for (const auto& r : records) {
        const Trial& t = plan.trials.at(r.trial_index);
        if (t.protocol == Protocol::DSIS) {
            into.dsis_csv += csv_join({r.session, t.stimulus, r.response}) + "\n";
        } else {
            PwcVote v{r.session, t.group, t.left, t.right, parse_choice(r.response), r.latency_ms};
            into.pwc_jsonl += to_json_line(v) + "\n";
        }
    }
    return into;
}

struct SessionStore::Session {
    SessionInfo info;
    ExperimentPlan plan;
    std::vector<std::optional<TrialRecord>> answers;
    std::map<std::size_t, double> served_at;
    std::FILE* log = nullptr;
    std::mutex m;

    ~Session() {
        if (log) std::fclose(log);
    }

    // Durable before return: written, flushed and synced.
    void append(const json& line) {
        const std::string text = line.dump() + "\n";
        if (std::fwrite(text.data(), 1, text.size(), log) != text.size() || std::fflush(log) != 0 ||
            ::fsync(::fileno(log)) != 0)
            throw EnvironmentError("cannot write the vote log of session '" + info.id + "'");
    }
};

SessionStore::SessionStore(fs::path root, std::vector<StimulusMeta> catalog, Clock clock)
    : root_(std::move(root)), catalog_(std::move(catalog)), clock_(clock ? std::move(clock) : Clock(wall_clock_ms)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec || !fs::is_directory(root_)) throw EnvironmentError("cannot create session directory " + root_.string());
    std::vector<fs::path> logs;
    for (const auto& e : fs::directory_iterator(root_))
        if (e.path().extension() == ".jsonl") logs.push_back(e.path());
    std::sort(logs.begin(), logs.end());
    for (const auto& p : logs) replay(p);
}

SessionStore::~SessionStore() = default;

void SessionStore::replay(const fs::path& path) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) lines.push_back(line);
    if (lines.empty()) return;

    auto s = std::make_unique<Session>();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        json j;
        try {
            j = json::parse(lines[i]);
        } catch (const json::parse_error&) {
            if (i + 1 == lines.size()) break;  // torn final write
            throw IntegrityError(path.string() + ":" + std::to_string(i + 1) + ": corrupt vote log line");
        }
        const std::string type = j.value("type", "");
        if (i == 0) {
            if (type != "open") throw IntegrityError(path.string() + ": log does not start with an open record");
            s->info.id = s->info.subject = j.at("subject").get<std::string>();
            s->plan = plan_from_json(j.at("plan"));
            s->info.protocol = s->plan.protocol;
            s->info.trials = s->plan.trials.size();
            s->answers.resize(s->plan.trials.size());
        } else if (type == "vote") {
            TrialRecord r = record_from_log(j);
            if (r.trial_index >= s->answers.size() || s->answers[r.trial_index])
                throw IntegrityError(path.string() + ":" + std::to_string(i + 1) + ": inconsistent vote record");
            s->answers[r.trial_index] = std::move(r);
            ++s->info.answered;
        } else if (type == "duplicate") {
            ++s->info.duplicates;
        } else if (type == "close") {
            s->info.closed = true;
        } else {
            throw IntegrityError(path.string() + ":" + std::to_string(i + 1) + ": unknown record type");
        }
    }
    s->log = std::fopen(path.c_str(), "a");
    if (!s->log) throw EnvironmentError("cannot reopen " + path.string());
    const std::string id = s->info.id;
    sessions_.emplace(id, std::move(s));
}

SessionStore::Session& SessionStore::find(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw AuthError("unknown session '" + id + "'");
    return *it->second;
}

SessionInfo SessionStore::open(const std::string& subject, Protocol protocol, std::uint64_t seed,
                               const PlanOptions& options) {
    static const std::regex kId("[A-Za-z0-9_.-]{1,64}");
    if (!std::regex_match(subject, kId) || subject == "." || subject == "..")
        throw ValidationError("subject id must match [A-Za-z0-9_.-]{1,64}");
    auto s = std::make_unique<Session>();
    s->plan = generate_plan(protocol, catalog_, seed, options);
    s->info = {subject, subject, protocol, false, s->plan.trials.size(), 0, 0};
    s->answers.resize(s->plan.trials.size());

    std::lock_guard lock(mutex_);
    if (sessions_.count(subject)) throw StateError("session '" + subject + "' already exists");
    const fs::path path = root_ / (subject + ".jsonl");
    s->log = std::fopen(path.c_str(), "a");
    if (!s->log) throw EnvironmentError("cannot create " + path.string());
    s->append({{"type", "open"}, {"subject", subject}, {"plan", to_json(s->plan)}});
    const SessionInfo info = s->info;
    sessions_.emplace(subject, std::move(s));
    return info;
}

std::optional<Trial> SessionStore::next(const std::string& id) {
    Session& s = find(id);
    std::lock_guard lock(s.m);
    if (s.info.closed) throw StateError("session '" + id + "' is closed");
    for (std::size_t i = 0; i < s.answers.size(); ++i)
        if (!s.answers[i]) {
            s.served_at.emplace(i, clock_());
            return s.plan.trials[i];
        }
    return std::nullopt;
}

SubmitResult SessionStore::submit(const TrialRecord& record) {
    Session& s = find(record.session);
    std::lock_guard lock(s.m);
    if (s.info.closed) throw StateError("session '" + record.session + "' is closed");
    if (record.trial_index >= s.plan.trials.size())
        throw ValidationError("trial index " + std::to_string(record.trial_index) + " is outside the playlist of " +
                              std::to_string(s.plan.trials.size()));
    const Trial& t = s.plan.trials[record.trial_index];

    TrialRecord r = record;
    if (r.left.empty()) r.left = t.shown(Side::Left);
    if (r.right.empty()) r.right = t.shown(Side::Right);
    if (r.left != t.shown(Side::Left) || r.right != t.shown(Side::Right))
        throw ValidationError("stimuli of trial " + std::to_string(r.trial_index) + " do not match the playlist");
    if (t.protocol == Protocol::DSIS) {
        if (r.response.size() != 1 || r.response[0] < '1' || r.response[0] > '5')
            throw ValidationError("DSIS response must be an integer score 1..5, got \"" + r.response + "\"");
    } else if (r.response != "left" && r.response != "right" && r.response != "not_sure") {
        throw ValidationError("PWC response must be \"left\", \"right\" or \"not_sure\", got \"" + r.response + "\"");
    }
    if (!(r.latency_ms >= 0.0)) throw ValidationError("latency must be non-negative");

    r.received_at_ms = clock_();
    r.flags.clear();
    const auto served = s.served_at.find(r.trial_index);
    if (r.latency_ms < kMinExposureMs ||
        (served != s.served_at.end() && r.received_at_ms - served->second < kMinExposureMs))
        r.flags.push_back("short_exposure");

    SubmitResult result;
    if (s.answers[r.trial_index]) {
        r.flags.push_back("duplicate");
        json line = to_json(r);
        line["type"] = "duplicate";
        s.append(line);
        ++s.info.duplicates;
        result.duplicate = true;
        result.flags = r.flags;
        return result;
    }
    json line = to_json(r);
    line["type"] = "vote";
    s.append(line);
    result.accepted = true;
    result.flags = r.flags;
    s.answers[r.trial_index] = std::move(r);
    ++s.info.answered;
    return result;
}

void SessionStore::close(const std::string& id) {
    Session& s = find(id);
    std::lock_guard lock(s.m);
    if (s.info.closed) return;
    s.append({{"type", "close"}});
    s.info.closed = true;
}

SessionInfo SessionStore::info(const std::string& id) const {
    Session& s = find(id);
    std::lock_guard lock(s.m);
    return s.info;
}

std::vector<SessionInfo> SessionStore::sessions() const {
    std::vector<std::string> ids;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [id, _] : sessions_) ids.push_back(id);
    }
    std::vector<SessionInfo> out;
    for (const auto& id : ids) out.push_back(info(id));
    return out;
}

const ExperimentPlan& SessionStore::plan(const std::string& id) const { return find(id).plan; }

std::vector<TrialRecord> SessionStore::records(const std::string& id) const {
    Session& s = find(id);
    std::lock_guard lock(s.m);
    std::vector<TrialRecord> out;
    for (const auto& a : s.answers)
        if (a) out.push_back(*a);
    return out;
}

ExportFiles SessionStore::export_results(const std::vector<std::string>& ids) const {
    std::vector<std::string> order = ids;
    if (order.empty()) {
        std::lock_guard lock(mutex_);
        for (const auto& [id, _] : sessions_) order.push_back(id);
    }
    // snapshot first so a late close cannot mix states
    std::vector<std::pair<const Session*, std::vector<TrialRecord>>> snap;
    for (const auto& id : order) {
        Session& s = find(id);
        std::lock_guard lock(s.m);
        if (!s.info.closed) throw StateError("session '" + id + "' is still open");
        std::vector<TrialRecord> recs;
        for (const auto& a : s.answers)
            if (a) recs.push_back(*a);
        snap.emplace_back(&s, std::move(recs));
    }
    ExportFiles files;
    files.dsis_csv = "subject_id,stimulus_id,score\n";
    for (const auto& [s, recs] : snap) files = export_records(s->plan, recs, std::move(files));
    return files;
}

}  // namespace pcqa
