// Scripted predictor speaking the line protocol, for tests.
// Usage: fake_adapter <mode>
//   echo     answer each request with the last word of its input
//   spos     like echo, but answer the first request with "spos="
//   omit     drop the last response
//   dup      answer the first request twice
//   garbage  write a non-JSON line
//   fail     read everything, then exit 3
//   hang     read everything, then never answer
//   reverse  answer only after EOF, in reverse order

#include <chrono>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace {

std::string last_word(const std::string& s) {
  auto end = s.find_last_not_of(" \n");
  if (end == std::string::npos) return "";
  auto start = s.find_last_of(" \n", end);
  return s.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
}

void respond(const std::string& id, const std::string& output) {
  std::cout << nlohmann::json{{"id", id}, {"output", output}}.dump() << '\n' << std::flush;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "echo";
  std::vector<std::pair<std::string, std::string>> seen;
  std::string line;
  bool first = true;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    auto req = nlohmann::json::parse(line);
    const auto id = req.at("id").get<std::string>();
    const auto out = last_word(req.at("input").get<std::string>());
    seen.emplace_back(id, out);
    if (mode == "echo" || mode == "omit") {
      if (mode == "echo") respond(id, out);
    } else if (mode == "spos") {
      respond(id, first ? "spos=" : out);
    } else if (mode == "dup") {
      respond(id, out);
      if (first) respond(id, out);
    } else if (mode == "garbage") {
      std::cout << "{not json\n" << std::flush;
    }
    first = false;
  }
  if (mode == "omit") {
    for (std::size_t i = 0; i + 1 < seen.size(); ++i) respond(seen[i].first, seen[i].second);
  } else if (mode == "reverse") {
    for (auto it = seen.rbegin(); it != seen.rend(); ++it) respond(it->first, it->second);
  } else if (mode == "fail") {
    std::cerr << "fake_adapter: failing on purpose\n";
    return 3;
  } else if (mode == "hang") {
    std::this_thread::sleep_for(std::chrono::seconds(30));
  }
  return 0;
}
