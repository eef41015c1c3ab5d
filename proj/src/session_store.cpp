#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

#include "tombandit/session.hpp"

namespace tombandit {

SessionStore::SessionStore(std::filesystem::path dir, bool sync) : dir_(std::move(dir)), sync_(sync) {
  if (!dir_.empty()) std::filesystem::create_directories(dir_ / "sessions");
}

void SessionStore::append(const std::string& session_id, const nlohmann::json& entry) {
  if (dir_.empty()) return;
  const auto path = dir_ / "sessions" / (session_id + ".jsonl");
  const std::string line = entry.dump() + "\n";
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw ServiceError(ErrorKind::internal, "store_failure", "cannot open " + path.string() + ": " + std::strerror(errno));
  }
  // One write per entry: O_APPEND keeps the line contiguous.
  std::size_t written = 0;
  while (written < line.size()) {
    const auto n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw ServiceError(ErrorKind::internal, "store_failure", "write to " + path.string() + " failed: " + std::strerror(err));
    }
    written += static_cast<std::size_t>(n);
  }
  if (sync_ && ::fdatasync(fd) != 0) {
    const int err = errno;
    ::close(fd);
    throw ServiceError(ErrorKind::internal, "store_failure", "fdatasync failed: " + std::string(std::strerror(err)));
  }
  ::close(fd);
}

std::map<std::string, std::vector<nlohmann::json>> SessionStore::load_all() const {
  std::map<std::string, std::vector<nlohmann::json>> out;
  if (dir_.empty()) return out;
  for (const auto& file : std::filesystem::directory_iterator(dir_ / "sessions")) {
    if (file.path().extension() != ".jsonl") continue;
    std::ifstream in(file.path());
    std::vector<nlohmann::json> entries;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto parsed = nlohmann::json::parse(line, nullptr, false);
      // A torn final line from a crash mid-append is dropped.
      if (parsed.is_discarded()) {
        if (in.peek() == std::char_traits<char>::eof()) break;
        throw ServiceError(ErrorKind::internal, "corrupt_log", "unparseable line in " + file.path().string());
      }
      entries.push_back(std::move(parsed));
    }
    out.emplace(file.path().stem().string(), std::move(entries));
  }
  return out;
}

}  // namespace tombandit
