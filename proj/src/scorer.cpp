#include "fairsel/train.hpp"

#include <json.hpp>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>
#include <thread>

#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

namespace fairsel {

Scores blackbox_scores(Scorer& endpoint, const std::vector<std::size_t>& selected, std::size_t all_n) {
    for (auto i : selected)
        if (i >= all_n) throw InvalidInput("selected index out of range");
    auto v = endpoint.train_score(selected, all_n);
    if (v.size() != all_n) throw ProtocolViolation("scorer returned " + std::to_string(v.size()) + " scores, expected " +
                                                   std::to_string(all_n));
    for (double s : v) {
        if (!std::isfinite(s)) throw ProtocolViolation("non-finite score");
        if (s < 0.0 || s > 1.0) throw ScoreOutOfRange("score outside [0,1]");
    }
    return {std::move(v), Direction::CorrectWhenAtLeast};
}

LogregScorer::LogregScorer(Dataset data, HyperParams h, TrainConfig cfg)
    : data_(std::move(data)), h_(h), cfg_(cfg) {}

std::vector<double> LogregScorer::train_score(const std::vector<std::size_t>& selected, std::size_t all_n) {
    if (all_n != data_.size()) throw InvalidInput("all_n does not match the scorer's data");
    Selection z(all_n);
    for (auto i : selected) {
        if (i >= all_n) throw InvalidInput("selected index out of range");
        z.z[i] = 1;
    }
    auto fit = fit_logreg_weighted(data_, z, h_, cfg_);
    std::vector<double> p(all_n);
    for (std::size_t i = 0; i < all_n; ++i) p[i] = std::exp(fit.scores.values[i]);
    return p;
}

std::string scorer_request(const std::vector<std::size_t>& selected, std::size_t all_n) {
    nlohmann::json j;
    j["cmd"] = "train_score";
    j["selected"] = selected;
    j["all_n"] = all_n;
    return j.dump();
}

std::vector<double> parse_scorer_reply(const std::string& line, std::size_t all_n) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolViolation(std::string("unparseable scorer reply: ") + e.what());
    }
    if (!j.is_object() || !j.contains("scores") || !j["scores"].is_array())
        throw ProtocolViolation("scorer reply lacks a scores array");
    const auto& arr = j["scores"];
    if (arr.size() != all_n)
        throw ProtocolViolation("scorer returned " + std::to_string(arr.size()) + " scores, expected " +
                                std::to_string(all_n));
    std::vector<double> out;
    out.reserve(all_n);
    for (const auto& v : arr) {
        if (!v.is_number()) throw ProtocolViolation("non-numeric score");
        double d = v.get<double>();
        if (!std::isfinite(d)) throw ProtocolViolation("non-finite score");
        if (d < 0.0 || d > 1.0) throw ScoreOutOfRange("score " + std::to_string(d) + " outside [0,1]");
        out.push_back(d);
    }
    return out;
}

SubprocessScorer::SubprocessScorer(const std::string& command, int timeout_ms) : timeout_ms_(timeout_ms) {
    int sv[2];
    if (socketpair(AF_UNIX, SOCK_STREAM, 0, sv) != 0)
        throw ProtocolError(std::string("socketpair failed: ") + std::strerror(errno));
    pid_t pid = fork();
    if (pid < 0) {
        close(sv[0]);
        close(sv[1]);
        throw ProtocolError(std::string("fork failed: ") + std::strerror(errno));
    }
    if (pid == 0) {
        setpgid(0, 0);
        dup2(sv[1], STDIN_FILENO);
        dup2(sv[1], STDOUT_FILENO);
        close(sv[0]);
        close(sv[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(sv[1]);
    pid_ = pid;
    to_child_ = sv[0];
    from_child_ = sv[0];
}

SubprocessScorer::~SubprocessScorer() {
    try {
        quit();
    } catch (...) {
    }
}

void SubprocessScorer::write_line(const std::string& s) {
    std::string msg = s + "\n";
    std::size_t off = 0;
    while (off < msg.size()) {
        ssize_t w = send(to_child_, msg.data() + off, msg.size() - off, MSG_NOSIGNAL);
        if (w < 0) {
            if (errno == EINTR) continue;
            throw ProtocolViolation(std::string("scorer write failed: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(w);
    }
}

std::string SubprocessScorer::read_line() {
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + std::chrono::milliseconds(timeout_ms_);
    for (;;) {
        auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
        if (left <= 0) throw ProtocolTimeout("scorer did not answer within " + std::to_string(timeout_ms_) + " ms");
        pollfd p{from_child_, POLLIN, 0};
        int rc = poll(&p, 1, static_cast<int>(left));
        if (rc < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("poll failed: ") + std::strerror(errno));
        }
        if (rc == 0) continue;
        char buf[65536];
        ssize_t r = read(from_child_, buf, sizeof buf);
        if (r < 0) {
            if (errno == EINTR) continue;
            throw ProtocolViolation(std::string("scorer read failed: ") + std::strerror(errno));
        }
        if (r == 0) throw ProtocolViolation("scorer closed its output");
        buffer_.append(buf, static_cast<std::size_t>(r));
    }
}

std::vector<double> SubprocessScorer::train_score(const std::vector<std::size_t>& selected, std::size_t all_n) {
    if (pid_ < 0) throw ProtocolError("scorer is not running");
    write_line(scorer_request(selected, all_n));
    return parse_scorer_reply(read_line(), all_n);
}

void SubprocessScorer::quit() {
    if (pid_ < 0) return;
    try {
        write_line(R"({"cmd":"quit"})");
    } catch (const ProtocolError&) {
    }
    shutdown(to_child_, SHUT_WR);
    int status = 0;
    bool done = false;
    for (int i = 0; i < 50 && !done; ++i) {
        if (waitpid(pid_, &status, WNOHANG) == pid_) done = true;
        else std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    if (!done) {
        kill(-pid_, SIGKILL);
        waitpid(pid_, &status, 0);
    }
    close(to_child_);
    pid_ = -1;
    to_child_ = from_child_ = -1;
}

}  // namespace fairsel
