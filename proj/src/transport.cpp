#include "qid/transport.hpp"

#include <cstring>
#include <stdexcept>
#include <vector>

#include <arpa/inet.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace qid {

namespace {

class FdStream : public FrameStream {
public:
    explicit FdStream(int fd) : fd_(fd) {}
    ~FdStream() override {
        if (fd_ >= 0) ::close(fd_);
    }
    FdStream(const FdStream&) = delete;

    bool send(const Frame& f) override {
        std::vector<uint8_t> bytes = encode_frame(f);
        size_t off = 0;
        while (off < bytes.size()) {
            ssize_t n = ::send(fd_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
            if (n <= 0) return false;
            off += size_t(n);
        }
        return true;
    }

    std::optional<Frame> recv(int timeout_ms) override {
        for (;;) {
            auto dec = decode_frame(buf_);
            if (dec.frame) {
                buf_.erase(buf_.begin(), buf_.begin() + long(dec.consumed));
                return std::move(dec.frame);
            }
            if (dec.error != DecodeError::Truncated) return std::nullopt; // poisoned stream
            struct pollfd pfd{fd_, POLLIN, 0};
            int pr = ::poll(&pfd, 1, timeout_ms);
            if (pr <= 0) return std::nullopt;
            uint8_t chunk[4096];
            ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
            if (n <= 0) return std::nullopt;
            buf_.insert(buf_.end(), chunk, chunk + n);
        }
    }

private:
    int fd_;
    std::vector<uint8_t> buf_;
};

std::pair<std::string, uint16_t> split_endpoint(const std::string& endpoint) {
    auto colon = endpoint.rfind(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("endpoint must look like host:port");
    std::string host = endpoint.substr(0, colon);
    int port = std::stoi(endpoint.substr(colon + 1));
    if (port <= 0 || port > 65535) throw std::invalid_argument("endpoint port out of range");
    return {host.empty() ? "127.0.0.1" : host, uint16_t(port)};
}

} // namespace

std::pair<std::unique_ptr<FrameStream>, std::unique_ptr<FrameStream>> stream_pair() {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0)
        throw std::runtime_error("socketpair failed");
    return {std::make_unique<FdStream>(fds[0]), std::make_unique<FdStream>(fds[1])};
}

std::unique_ptr<FrameStream> tcp_connect(const std::string& endpoint, int timeout_ms) {
    auto [host, port] = split_endpoint(endpoint);
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw std::runtime_error("socket failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw std::runtime_error("bad address " + host);
    }
    (void)timeout_ms;
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(fd);
        throw std::runtime_error("connect failed to " + endpoint);
    }
    return std::make_unique<FdStream>(fd);
}

int tcp_listen(const std::string& endpoint) {
    auto [host, port] = split_endpoint(endpoint);
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw std::runtime_error("socket failed");
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw std::runtime_error("bad address " + host);
    }
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd, 4) != 0) {
        ::close(fd);
        throw std::runtime_error("bind/listen failed on " + endpoint);
    }
    return fd;
}

std::unique_ptr<FrameStream> tcp_accept(int listen_fd, int timeout_ms) {
    struct pollfd pfd{listen_fd, POLLIN, 0};
    if (::poll(&pfd, 1, timeout_ms) <= 0) return nullptr;
    int fd = ::accept(listen_fd, nullptr, nullptr);
    if (fd < 0) return nullptr;
    return std::make_unique<FdStream>(fd);
}

Decision drive_user(UserSession& user, FrameStream& stream, int timeout_ms) {
    for (Frame& f : user.start())
        if (!stream.send(f)) {
            user.abort_session();
            return user.decision();
        }
    while (!user.finished()) {
        auto incoming = stream.recv(timeout_ms);
        if (!incoming) {
            user.abort_session();
            stream.send(Frame{FrameType::ABORT, {}});
            break;
        }
        for (Frame& f : user.on_frame(*incoming))
            if (!stream.send(f)) {
                user.abort_session();
                break;
            }
    }
    return user.decision();
}

Decision drive_server(ServerSession& server, FrameStream& stream, int timeout_ms) {
    while (!server.finished()) {
        auto incoming = stream.recv(timeout_ms);
        if (!incoming) {
            server.abort_session();
            stream.send(Frame{FrameType::ABORT, {}});
            break;
        }
        for (Frame& f : server.on_frame(*incoming))
            if (!stream.send(f)) {
                server.abort_session();
                break;
            }
    }
    return server.decision();
}

size_t run_proxy(FrameStream& user_side, FrameStream& server_side, const WireHook& hook,
                 int timeout_ms) {
    size_t forwarded = 0;
    int quiet = 0;
    // alternate short polls on both directions; a session is a handful of
    // frames, so fairness is not a concern
    while (quiet < timeout_ms) {
        bool moved = false;
        if (auto f = user_side.recv(10)) {
            std::vector<Frame> out = hook ? hook(true, *f) : std::vector<Frame>{*f};
            for (Frame& g : out) {
                server_side.send(g);
                ++forwarded;
            }
            moved = true;
            if (f->type == FrameType::ABORT) break;
        }
        if (auto f = server_side.recv(10)) {
            std::vector<Frame> out = hook ? hook(false, *f) : std::vector<Frame>{*f};
            for (Frame& g : out) {
                user_side.send(g);
                ++forwarded;
            }
            moved = true;
            if (f->type == FrameType::DECISION || f->type == FrameType::ABORT) {
                // drain the tail (OTP frame, mutual decision) briefly, then stop
                while (auto tail = server_side.recv(50)) {
                    std::vector<Frame> out2 = hook ? hook(false, *tail) : std::vector<Frame>{*tail};
                    for (Frame& g : out2) {
                        user_side.send(g);
                        ++forwarded;
                    }
                }
                while (auto back = user_side.recv(50)) {
                    std::vector<Frame> out2 = hook ? hook(true, *back) : std::vector<Frame>{*back};
                    for (Frame& g : out2) {
                        server_side.send(g);
                        ++forwarded;
                    }
                }
                return forwarded;
            }
        }
        quiet = moved ? 0 : quiet + 20;
    }
    return forwarded;
}

} // namespace qid
