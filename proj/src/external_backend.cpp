#include "posekit/external_backend.hpp"

#include <csignal>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>

#include "posekit/errors.hpp"

namespace posekit {

namespace {

// A dead child must surface as EPIPE on write, not kill the process.
void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void write_all(int fd, const uint8_t* data, size_t size) {
  size_t done = 0;
  while (done < size) {
    const ssize_t n = ::write(fd, data + done, size - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(std::string("backend pipe write failed: ") + std::strerror(errno));
    }
    done += static_cast<size_t>(n);
  }
}

void read_all(int fd, uint8_t* data, size_t size) {
  size_t done = 0;
  while (done < size) {
    const ssize_t n = ::read(fd, data + done, size - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(std::string("backend pipe read failed: ") + std::strerror(errno));
    }
    if (n == 0) {
      throw IoError("backend process closed its output mid-message");
    }
    done += static_cast<size_t>(n);
  }
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 24));
}

uint32_t get_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

float get_f32(const uint8_t* p) {
  const uint32_t bits = get_u32(p);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace

ExternalProcess::ExternalProcess(const std::string& command) {
  ignore_sigpipe_once();
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
    throw IoError("cannot create backend pipes");
  }
  const int pid = ::fork();
  if (pid < 0) {
    throw IoError("cannot fork backend process");
  }
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  pid_ = pid;
  to_child_ = to_child[1];
  from_child_ = from_child[0];
  ::close(to_child[0]);
  ::close(from_child[1]);
}

ExternalProcess::~ExternalProcess() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
}

std::vector<uint8_t> ExternalProcess::roundtrip(const std::vector<uint8_t>& payload) {
  std::vector<uint8_t> header;
  put_u32(header, static_cast<uint32_t>(payload.size()));
  write_all(to_child_, header.data(), header.size());
  write_all(to_child_, payload.data(), payload.size());

  uint8_t len_buf[4];
  read_all(from_child_, len_buf, 4);
  const uint32_t len = get_u32(len_buf);
  if (len > (1u << 30)) {
    throw IoError("backend response length implausible: " + std::to_string(len));
  }
  std::vector<uint8_t> response(len);
  read_all(from_child_, response.data(), len);
  return response;
}

std::vector<uint8_t> encode_image_payload(const ImageU8& image) {
  std::vector<uint8_t> payload;
  payload.reserve(12 + image.data.size());
  put_u32(payload, static_cast<uint32_t>(image.width));
  put_u32(payload, static_cast<uint32_t>(image.height));
  put_u32(payload, 3);
  payload.insert(payload.end(), image.data.begin(), image.data.end());
  return payload;
}

ExternalDetector::ExternalDetector(const std::string& command, int input_long_side)
    : process_(command), input_long_side_(input_long_side) {}

std::vector<Box> ExternalDetector::detect(const ImageU8& image, int64_t) {
  const std::vector<uint8_t> response = process_.roundtrip(encode_image_payload(image));
  if (response.size() < 4) {
    throw IoError("detector backend response too short");
  }
  const uint32_t count = get_u32(response.data());
  if (response.size() != 4 + static_cast<size_t>(count) * 20) {
    throw IoError("detector backend response size mismatch");
  }
  std::vector<Box> boxes;
  boxes.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    const uint8_t* p = response.data() + 4 + i * 20;
    Box b;
    b.x = get_f32(p);
    b.y = get_f32(p + 4);
    b.w = get_f32(p + 8);
    b.h = get_f32(p + 12);
    b.score = get_f32(p + 16);
    boxes.push_back(b);
  }
  return boxes;
}

ExternalPose::ExternalPose(const std::string& command) : process_(command) {}

HeatmapStack ExternalPose::estimate(const ImageU8& patch, const PatchContext&) {
  const std::vector<uint8_t> response = process_.roundtrip(encode_image_payload(patch));
  return deserialize_heatmap(response.data(), response.size());
}

}  // namespace posekit
