#pragma once

#include <memory>
#include <string>

#include "pcqa/session/assets.hpp"
#include "pcqa/session/store.hpp"

namespace pcqa {

/// HTTP+JSON front end of a SessionStore.
///
///   POST /session                 {"subject","protocol","seed","parts","separate_contents"} -> 201
///   GET  /session/{id}            session status
///   GET  /session/{id}/next       trial descriptor, {"done":true} at the end
///   POST /session/{id}/vote       trial record -> {"accepted","duplicate","flags"}
///   POST /session/{id}/close
///   GET  /export[?sessions=a,b]   ustar archive: dsis_scores.csv, pwc_votes.jsonl
///   GET  /assets/{id}[?format=ply] packed binary (default) or the source PLY
///
/// Errors come back as {"error","message"}: 400 validation, 401 unknown
/// session, 404 unknown route or asset, 409 state conflict, 500 otherwise.
class SessionServer {
public:
    SessionServer(SessionStore& store, std::shared_ptr<AssetStore> assets = nullptr);
    ~SessionServer();

    /// Binds and returns the port (port 0 picks a free one). Throws
    /// EnvironmentError when binding fails.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    void run();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Seconds of playback (DSIS) or inspection (PWC) per trial.
inline constexpr double kTrialTimeBudgetS = 12.0;
/// DSIS pause between playback and voting.
inline constexpr double kDsisHoldS = 1.0;

/// GET /session/{id}/next body for `trial`.
nlohmann::json trial_descriptor(const std::string& session, const Trial& trial);

}  // namespace pcqa
