// Copyright 2026 The survey-bench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gateway.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

namespace gateway {

namespace {

using Clock = std::chrono::steady_clock;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

enum class Kind { Unknown, Lines, WebSocket };

struct Conn {
    int fd = -1;
    Kind kind = Kind::Unknown;
    std::string in;
    std::string fragment;  // WebSocket continuation buffer
    bool closing = false;
};

bool send_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        off += static_cast<std::size_t>(n);
    }
    return true;
}

std::string ws_frame(std::uint8_t opcode, const std::string& payload) {
    std::string f;
    f.push_back(static_cast<char>(0x80 | opcode));
    std::size_t n = payload.size();
    if (n < 126) {
        f.push_back(static_cast<char>(n));
    } else if (n <= 0xffff) {
        f.push_back(static_cast<char>(126));
        f.push_back(static_cast<char>((n >> 8) & 0xff));
        f.push_back(static_cast<char>(n & 0xff));
    } else {
        f.push_back(static_cast<char>(127));
        for (int i = 7; i >= 0; --i) f.push_back(static_cast<char>((n >> (8 * i)) & 0xff));
    }
    return f + payload;
}

bool send_line(Conn& c, const std::string& line) {
    if (c.kind == Kind::WebSocket) return send_all(c.fd, ws_frame(0x1, line));
    return send_all(c.fd, line + "\n");
}

std::string http_response(int code, const std::string& reason, const std::string& type,
                          const std::string& body) {
    std::ostringstream os;
    os << "HTTP/1.1 " << code << " " << reason << "\r\n"
       << "Content-Type: " << type << "\r\n"
       << "Content-Length: " << body.size() << "\r\n"
       << "Connection: close\r\n\r\n"
       << body;
    return os.str();
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return s;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::string content_type(const std::string& path) {
    auto ends = [&](const char* ext) {
        std::size_t n = std::strlen(ext);
        return path.size() >= n && path.compare(path.size() - n, n, ext) == 0;
    };
    if (ends(".html")) return "text/html; charset=utf-8";
    if (ends(".js")) return "text/javascript";
    if (ends(".css")) return "text/css";
    if (ends(".json")) return "application/json";
    if (ends(".svg")) return "image/svg+xml";
    if (ends(".png")) return "image/png";
    return "application/octet-stream";
}

// Parses "host:port", ":port" or "port".
bool split_address(const std::string& addr, std::string* host, std::string* port) {
    auto colon = addr.rfind(':');
    if (colon == std::string::npos) {
        *host = "127.0.0.1";
        *port = addr;
    } else {
        *host = addr.substr(0, colon);
        *port = addr.substr(colon + 1);
        if (host->empty()) *host = "127.0.0.1";
    }
    return !port->empty();
}

int open_listener(const std::string& address, std::string* bound, std::string* error) {
    std::string host, port;
    if (!split_address(address, &host, &port)) {
        *error = "bad listen address '" + address + "'";
        return -1;
    }
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
        *error = std::string("cannot resolve ") + address + ": " + gai_strerror(rc);
        return -1;
    }
    int fd = -1;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 8) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) {
        *error = "cannot listen on " + address + ": " + std::strerror(errno);
        return -1;
    }
    sockaddr_storage ss{};
    socklen_t len = sizeof ss;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&ss), &len);
    char name[INET6_ADDRSTRLEN] = "?";
    int p = 0;
    if (ss.ss_family == AF_INET) {
        auto* in = reinterpret_cast<sockaddr_in*>(&ss);
        ::inet_ntop(AF_INET, &in->sin_addr, name, sizeof name);
        p = ntohs(in->sin_port);
    } else if (ss.ss_family == AF_INET6) {
        auto* in = reinterpret_cast<sockaddr_in6*>(&ss);
        ::inet_ntop(AF_INET6, &in->sin6_addr, name, sizeof name);
        p = ntohs(in->sin6_port);
    }
    *bound = std::string(name) + ":" + std::to_string(p);
    return fd;
}

class Server {
public:
    Server(const Options& options, const Hooks& hooks) : opt_(options), hooks_(hooks) {}

    int run(int listener) {
        auto period = std::chrono::microseconds(1'000'000 / std::max(1, opt_.tick_hz));
        auto next_tick = Clock::now() + period;
        while (!g_stop && !hooks_.finished()) {
            std::vector<pollfd> fds;
            fds.push_back({listener, POLLIN, 0});
            for (const auto& c : conns_) fds.push_back({c.fd, POLLIN, 0});

            int timeout = 100;
            if (controller_) {
                auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(next_tick - Clock::now());
                timeout = static_cast<int>(std::clamp<long long>(wait.count(), 0, 100));
            }
            int rc = ::poll(fds.data(), fds.size(), timeout);
            if (rc < 0 && errno != EINTR) return 1;

            if (controller_) {
                // Catch up at most a few ticks after a stall rather than
                // replaying a long burst.
                int budget = 5;
                while (Clock::now() >= next_tick && budget-- > 0 && !hooks_.finished()) {
                    broadcast(hooks_.tick(), true);
                    next_tick += period;
                }
                if (Clock::now() >= next_tick) next_tick = Clock::now() + period;
            } else {
                // Time stands still with nobody at the controls.
                next_tick = Clock::now() + period;
            }

            if (rc > 0) {
                if (fds[0].revents & POLLIN) accept_one(listener);
                for (std::size_t i = 1; i < fds.size(); ++i) {
                    if (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) read_from(fds[i].fd);
                }
            }
            reap();
        }
        for (auto& c : conns_) ::close(c.fd);
        conns_.clear();
        return 0;
    }

private:
    Conn* find(int fd) {
        for (auto& c : conns_) {
            if (c.fd == fd) return &c;
        }
        return nullptr;
    }

    void accept_one(int listener) {
        int fd = ::accept(listener, nullptr, nullptr);
        if (fd < 0) return;
        Conn c;
        c.fd = fd;
        conns_.push_back(std::move(c));
    }

    void read_from(int fd) {
        Conn* c = find(fd);
        if (!c) return;
        char buf[8192];
        ssize_t n = ::recv(fd, buf, sizeof buf, 0);
        if (n <= 0) {
            c->closing = true;
            return;
        }
        c->in.append(buf, static_cast<std::size_t>(n));
        if (c->kind == Kind::Unknown) classify(*c);
        if (c->kind == Kind::Lines) drain_lines(*c);
        if (c->kind == Kind::WebSocket) drain_frames(*c);
    }

    void classify(Conn& c) {
        if (c.in.size() < 4 && std::string_view("GET ").substr(0, c.in.size()) == c.in) return;
        if (c.in.rfind("GET ", 0) != 0) {
            if (!claim(c)) return;
            c.kind = Kind::Lines;
            return;
        }
        auto end = c.in.find("\r\n\r\n");
        if (end == std::string::npos) return;
        std::istringstream req(c.in.substr(0, end));
        c.in.erase(0, end + 4);
        std::string request_line;
        std::getline(req, request_line);
        std::string method, target;
        std::istringstream(request_line) >> method >> target;
        std::string line, ws_key;
        bool upgrade = false;
        while (std::getline(req, line)) {
            auto colon = line.find(':');
            if (colon == std::string::npos) continue;
            std::string name = lower(trim(line.substr(0, colon)));
            std::string value = trim(line.substr(colon + 1));
            if (name == "upgrade" && lower(value) == "websocket") upgrade = true;
            if (name == "sec-websocket-key") ws_key = value;
        }
        if (upgrade && !ws_key.empty()) {
            if (controller_) {
                send_all(c.fd, http_response(409, "Conflict", "text/plain", "a controller is already connected\n"));
                c.closing = true;
                return;
            }
            send_all(c.fd, "HTTP/1.1 101 Switching Protocols\r\n"
                           "Upgrade: websocket\r\n"
                           "Connection: Upgrade\r\n"
                           "Sec-WebSocket-Accept: " +
                               websocket_accept_key(ws_key) + "\r\n\r\n");
            c.kind = Kind::WebSocket;
            controller_ = c.fd;
            return;
        }
        serve_static(c, target);
        c.closing = true;
    }

    bool claim(Conn& c) {
        if (controller_ && *controller_ != c.fd) {
            send_all(c.fd, "{\"type\":\"error\",\"code\":\"IllegalInMode\",\"message\":\"a controller is already connected\"}\n");
            c.closing = true;
            return false;
        }
        controller_ = c.fd;
        return true;
    }

    void serve_static(Conn& c, std::string target) {
        if (opt_.static_dir.empty()) {
            send_all(c.fd, http_response(404, "Not Found", "text/plain", "no static assets configured\n"));
            return;
        }
        target = target.substr(0, target.find('?'));
        if (target.empty() || target == "/") target = "/index.html";
        if (target.find("..") != std::string::npos) {
            send_all(c.fd, http_response(403, "Forbidden", "text/plain", "forbidden\n"));
            return;
        }
        std::ifstream in(opt_.static_dir + target, std::ios::binary);
        if (!in) {
            send_all(c.fd, http_response(404, "Not Found", "text/plain", "not found\n"));
            return;
        }
        std::ostringstream body;
        body << in.rdbuf();
        send_all(c.fd, http_response(200, "OK", content_type(target), body.str()));
    }

    void drain_lines(Conn& c) {
        std::size_t nl;
        while (!c.closing && (nl = c.in.find('\n')) != std::string::npos) {
            std::string line = c.in.substr(0, nl);
            c.in.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (trim(line).empty()) continue;
            deliver(c, line);
        }
    }

    void drain_frames(Conn& c) {
        while (!c.closing) {
            const auto* p = reinterpret_cast<const unsigned char*>(c.in.data());
            std::size_t avail = c.in.size();
            if (avail < 2) return;
            bool fin = p[0] & 0x80;
            std::uint8_t opcode = p[0] & 0x0f;
            bool masked = p[1] & 0x80;
            std::uint64_t len = p[1] & 0x7f;
            std::size_t pos = 2;
            if (len == 126) {
                if (avail < 4) return;
                len = (std::uint64_t{p[2]} << 8) | p[3];
                pos = 4;
            } else if (len == 127) {
                if (avail < 10) return;
                len = 0;
                for (int i = 0; i < 8; ++i) len = (len << 8) | p[2 + i];
                pos = 10;
            }
            if (len > (16u << 20)) {
                c.closing = true;
                return;
            }
            std::uint8_t mask[4] = {0, 0, 0, 0};
            if (masked) {
                if (avail < pos + 4) return;
                std::memcpy(mask, p + pos, 4);
                pos += 4;
            }
            if (avail < pos + len) return;
            std::string payload(c.in.data() + pos, static_cast<std::size_t>(len));
            for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(payload[i] ^ mask[i % 4]);
            c.in.erase(0, pos + static_cast<std::size_t>(len));

            switch (opcode) {
                case 0x0:
                case 0x1:
                case 0x2:
                    c.fragment += payload;
                    if (fin) {
                        std::string msg;
                        msg.swap(c.fragment);
                        std::istringstream lines(msg);
                        std::string line;
                        while (std::getline(lines, line)) {
                            if (!trim(line).empty()) deliver(c, line);
                        }
                    }
                    break;
                case 0x8:
                    send_all(c.fd, ws_frame(0x8, payload.substr(0, 2)));
                    c.closing = true;
                    return;
                case 0x9:
                    send_all(c.fd, ws_frame(0xA, payload));
                    break;
                default:
                    break;
            }
        }
    }

    void deliver(Conn& c, const std::string& line) {
        for (const auto& out : hooks_.apply(line)) {
            if (!send_line(c, out)) {
                c.closing = true;
                return;
            }
        }
    }

    void broadcast(const std::vector<std::string>& lines, bool from_tick) {
        Conn* c = controller_ ? find(*controller_) : nullptr;
        if (!c) return;
        for (const auto& line : lines) {
            // Plain tick acknowledgements are noise at 50 Hz.
            if (from_tick && line.rfind("{\"type\":\"ack\"", 0) == 0) continue;
            if (!send_line(*c, line)) {
                c->closing = true;
                return;
            }
        }
    }

    void reap() {
        for (auto it = conns_.begin(); it != conns_.end();) {
            if (it->closing) {
                if (controller_ == it->fd) controller_.reset();
                ::close(it->fd);
                it = conns_.erase(it);
            } else {
                ++it;
            }
        }
    }

    const Options& opt_;
    const Hooks& hooks_;
    std::vector<Conn> conns_;
    std::optional<int> controller_;
};

}  // namespace

std::string websocket_accept_key(const std::string& client_key) {
    std::string joined = client_key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
    unsigned char digest[SHA_DIGEST_LENGTH];
    unsigned int digest_len = 0;
    EVP_Digest(joined.data(), joined.size(), digest, &digest_len, EVP_sha1(), nullptr);
    unsigned char out[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
    int n = EVP_EncodeBlock(out, digest, SHA_DIGEST_LENGTH);
    return std::string(reinterpret_cast<char*>(out), static_cast<std::size_t>(n));
}

int serve(const Options& options, const Hooks& hooks, std::string* error) {
    std::string bound;
    int listener = open_listener(options.address, &bound, error);
    if (listener < 0) return 1;
    g_stop = false;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    if (hooks.on_listen) hooks.on_listen(bound);
    Server server(options, hooks);
    int rc = server.run(listener);
    ::close(listener);
    return rc;
}

}  // namespace gateway
