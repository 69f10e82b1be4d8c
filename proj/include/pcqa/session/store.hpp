#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcqa/session/plan.hpp"

namespace pcqa {

/// Votes earlier than this after the trial was served are flagged.
inline constexpr double kMinExposureMs = 2000.0;

struct TrialRecord {
    std::string session;
    std::size_t trial_index = 0;
    std::string left;   // stimulus ids as displayed
    std::string right;
    std::string response;  // DSIS "1".."5"; PWC "left" | "right" | "not_sure"
    double latency_ms = 0.0;
    double started_at_ms = 0.0;   // client clock
    double answered_at_ms = 0.0;  // client clock
    double received_at_ms = 0.0;  // server clock
    std::vector<std::string> flags;
};

/// Body of POST /session/{id}/vote. `response` may be a number or string.
/// Throws ValidationError for missing or mistyped fields.
TrialRecord trial_record_from_json(const nlohmann::json& j, const std::string& session);
nlohmann::json to_json(const TrialRecord& r);

struct SubmitResult {
    bool accepted = false;
    bool duplicate = false;
    std::vector<std::string> flags;
};

struct SessionInfo {
    std::string id;
    std::string subject;
    Protocol protocol = Protocol::DSIS;
    bool closed = false;
    std::size_t trials = 0;
    std::size_t answered = 0;
    std::size_t duplicates = 0;
};

struct ExportFiles {
    std::string dsis_csv;
    std::string pwc_jsonl;
};

/// Subject sessions with an append-only JSON-lines log per session under
/// `root`. Every vote is written and flushed to disk before it is
/// acknowledged; reopening the store replays the logs.
class SessionStore {
public:
    using Clock = std::function<double()>;  // milliseconds

    SessionStore(std::filesystem::path root, std::vector<StimulusMeta> catalog, Clock clock = {});
    ~SessionStore();
    SessionStore(const SessionStore&) = delete;
    SessionStore& operator=(const SessionStore&) = delete;

    /// Session ids are the subject ids: [A-Za-z0-9_.-]{1,64}. Throws
    /// ValidationError for a bad id and StateError when it already exists.
    SessionInfo open(const std::string& subject, Protocol protocol, std::uint64_t seed, const PlanOptions& options = {});

    /// Next unanswered trial, nullopt when the playlist is done. Marks the
    /// serve time used for the exposure check. AuthError for an unknown id.
    std::optional<Trial> next(const std::string& session);

    /// Validates and appends a vote. A second vote for an answered trial
    /// index is not stored; the result reports `duplicate`.
    /// AuthError: unknown session. StateError: closed session.
    /// ValidationError: bad trial index, stimuli not matching the trial, or
    /// a response outside the protocol's set.
    SubmitResult submit(const TrialRecord& record);

    void close(const std::string& session);

    SessionInfo info(const std::string& session) const;
    std::vector<SessionInfo> sessions() const;
    const ExperimentPlan& plan(const std::string& session) const;
    std::vector<TrialRecord> records(const std::string& session) const;

    /// DSIS CSV and PWC JSON lines for `ids` in the given order (all
    /// sessions, sorted by id, when empty). StateError when a session is
    /// still open, AuthError for an unknown id.
    ExportFiles export_results(const std::vector<std::string>& ids = {}) const;

    const std::vector<StimulusMeta>& catalog() const noexcept { return catalog_; }

private:
    struct Session;

    std::filesystem::path root_;
    std::vector<StimulusMeta> catalog_;
    Clock clock_;
    mutable std::mutex mutex_;  // guards sessions_ map structure
    std::map<std::string, std::unique_ptr<Session>> sessions_;

    Session& find(const std::string& id) const;
    void replay(const std::filesystem::path& log);
};

/// Export of answered trials, in the given order. Each record's session is
/// the subject id written to the files.
ExportFiles export_records(const ExperimentPlan& plan, const std::vector<TrialRecord>& records, ExportFiles into = {});

}  // namespace pcqa
