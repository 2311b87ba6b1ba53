/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, The IER Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ier/sandbox.hpp"

#include <algorithm>
#include <fstream>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "ier/errors.hpp"

namespace ier {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMaxLog = 64 * 1024;

bool safe_relative(const std::string& path) {
    if (path.empty()) return false;
    const fs::path p(path);
    if (p.is_absolute()) return false;
    return std::none_of(p.begin(), p.end(), [](const fs::path& part) { return part == ".."; });
}

class TempDir {
  public:
    explicit TempDir(const fs::path& root) {
        auto base = root.empty() ? fs::temp_directory_path() : root;
        std::error_code ec;
        fs::create_directories(base, ec);
        std::string tmpl = (base / "ier-sandbox-XXXXXX").string();
        if (::mkdtemp(tmpl.data()) == nullptr)
            throw ConfigError("cannot create sandbox directory under " + base.string());
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const noexcept { return path_; }

  private:
    fs::path path_;
};

}  // namespace

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

ProcessResult run_shell(const std::string& command, const fs::path& cwd, std::chrono::milliseconds timeout) {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) throw ConfigError("pipe() failed");
    const std::string dir = cwd.string();

    const pid_t pid = ::fork();
    if (pid < 0) {
        ::close(fds[0]);
        ::close(fds[1]);
        throw ConfigError("fork() failed");
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        if (::chdir(dir.c_str()) != 0) ::_exit(126);
        const int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
        ::dup2(fds[1], STDOUT_FILENO);
        ::dup2(fds[1], STDERR_FILENO);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    ::close(fds[1]);

    ProcessResult result;
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    char buf[4096];
    for (;;) {
        const auto left =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            result.timed_out = true;
            break;
        }
        pollfd pfd{fds[0], POLLIN, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
        if (rc < 0 && errno != EINTR) break;
        if (rc <= 0) continue;
        const auto n = ::read(fds[0], buf, sizeof buf);
        if (n <= 0) break;  // EOF: every writer closed
        if (result.output.size() < kMaxLog)
            result.output.append(buf, static_cast<std::size_t>(std::min<ssize_t>(n, kMaxLog - result.output.size())));
    }
    ::close(fds[0]);

    int status = 0;
    if (result.timed_out) {
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        return result;
    }
    // Output closed; the shell may still be exiting.
    for (;;) {
        const pid_t w = ::waitpid(pid, &status, WNOHANG);
        if (w == pid) break;
        if (std::chrono::steady_clock::now() >= deadline) {
            result.timed_out = true;
            ::kill(-pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            return result;
        }
        ::usleep(1000);
    }
    ::kill(-pid, SIGKILL);  // stray grandchildren that detached from the pipe
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    return result;
}

ProcessSandbox::ProcessSandbox(SandboxSettings settings)
    : settings_(std::move(settings)),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(settings_.max_parallel, 1, 256))) {
    if (settings_.compile_command.empty()) throw ConfigError("sandbox compile command is empty");
    if (settings_.timeout.count() <= 0) throw ConfigError("sandbox timeout must be positive");
}

bool ProcessSandbox::compiles(const Artifact& artifact) { return check(artifact, false).compiled; }

RunOutcome ProcessSandbox::compile_and_run(const Artifact& artifact) { return check(artifact, true); }

RunOutcome ProcessSandbox::check(const Artifact& artifact, bool run) {
    RunOutcome outcome;
    if (artifact.empty()) {
        outcome.log = "empty artifact";
        return outcome;
    }
    std::vector<std::string> paths;
    for (const auto& f : artifact.files) {
        if (!safe_relative(f.path)) {
            outcome.log = "refusing unsafe path: " + f.path;
            return outcome;
        }
        paths.push_back(f.path);
    }
    std::sort(paths.begin(), paths.end());
    std::string files;
    for (const auto& p : paths) files += (files.empty() ? "" : " ") + shell_quote(p);
    const auto main_it = std::find(paths.begin(), paths.end(), "main.py");
    const std::string main = shell_quote(main_it != paths.end() ? *main_it : paths.front());

    auto expand = [&](std::string cmd) {
        for (auto [key, value] : {std::pair<std::string, std::string>{"{files}", files}, {"{main}", main}}) {
            for (auto pos = cmd.find(key); pos != std::string::npos; pos = cmd.find(key, pos + value.size()))
                cmd.replace(pos, key.size(), value);
        }
        return cmd;
    };

    slots_.acquire();
    struct Release {
        std::counting_semaphore<256>& s;
        ~Release() { s.release(); }
    } release{slots_};

    TempDir dir(settings_.work_root);
    for (const auto& f : artifact.files) {
        const auto target = dir.path() / f.path;
        fs::create_directories(target.parent_path());
        std::ofstream out(target, std::ios::binary);
        if (!out) throw ConfigError("cannot materialize " + target.string());
        out << f.content;
    }

    const auto compile = run_shell(expand(settings_.compile_command), dir.path(), settings_.timeout);
    outcome.log = compile.output;
    if (compile.timed_out) outcome.log += "\n[compile timed out]";
    outcome.compiled = !compile.timed_out && compile.exit_code == 0;
    if (!run || !outcome.compiled || settings_.run_command.empty()) return outcome;

    const auto exec = run_shell(expand(settings_.run_command), dir.path(), settings_.timeout);
    outcome.log += exec.output;
    if (exec.timed_out) outcome.log += "\n[run timed out]";
    outcome.executed = !exec.timed_out && exec.exit_code == 0;
    return outcome;
}

}  // namespace ier
