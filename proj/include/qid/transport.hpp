#pragma once

#include <memory>
#include <optional>
#include <string>

#include "qid/attacks.hpp"
#include "qid/frame.hpp"
#include "qid/session.hpp"

namespace qid {

/// Blocking frame transport over a byte stream.
class FrameStream {
public:
    virtual ~FrameStream() = default;
    virtual bool send(const Frame& f) = 0;
    /// Receives one frame; nullopt on timeout, close or malformed input.
    virtual std::optional<Frame> recv(int timeout_ms) = 0;
};

/// Connected pair of in-process streams (unix socketpair underneath).
std::pair<std::unique_ptr<FrameStream>, std::unique_ptr<FrameStream>> stream_pair();

/// TCP endpoints of the form host:port.
std::unique_ptr<FrameStream> tcp_connect(const std::string& endpoint, int timeout_ms);
int tcp_listen(const std::string& endpoint);
std::unique_ptr<FrameStream> tcp_accept(int listen_fd, int timeout_ms);

inline constexpr int kDefaultPhaseTimeoutMs = 5000;

/// Runs the user state machine over a stream. Timeouts and transport
/// failures abort the session (keys untouched) and notify the peer.
Decision drive_user(UserSession& user, FrameStream& stream,
                    int timeout_ms = kDefaultPhaseTimeoutMs);
Decision drive_server(ServerSession& server, FrameStream& stream,
                      int timeout_ms = kDefaultPhaseTimeoutMs);

/// Forwards frames both ways, applying the attack to chosen frames, until
/// both sides finish or go quiet. Returns the number of frames forwarded.
size_t run_proxy(FrameStream& user_side, FrameStream& server_side, const WireHook& hook,
                 int timeout_ms = kDefaultPhaseTimeoutMs);

} // namespace qid
