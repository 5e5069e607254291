// Line-protocol predictor used by the tests. The first argument picks how it
// misbehaves: valid, short, rho1, garbage, slow, error, wrong_id, bad_hello,
// exit.

#include <chrono>
#include <iostream>
#include <string>
#include <thread>

#include <json.hpp>

using nlohmann::json;

namespace {

// Holds the last present target position over the horizon.
json hold_last(const json& request, int steps, double rho) {
  double x = 0.0;
  double y = 0.0;
  for (const auto& s : request["target"])
    if (s[3].get<bool>() && !s[1].is_null()) {
      x = s[1].get<double>();
      y = s[2].get<double>();
    }
  json out = json::array();
  for (int k = 0; k < steps; ++k) out.push_back({{"mux", x}, {"muy", y}, {"sigx", 1.0}, {"sigy", 1.0}, {"rho", rho}});
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "valid";
  std::string line;
  while (std::getline(std::cin, line)) {
    const json msg = json::parse(line, nullptr, false);
    if (msg.is_discarded()) return 3;
    const std::string type = msg.value("type", "");
    if (type == "hello") {
      std::cout << json{{"type", "hello"}, {"protocol_version", mode == "bad_hello" ? 2 : 1}}.dump() << std::endl;
      continue;
    }
    if (type != "predict") return 4;
    const auto id = msg["id"].get<std::uint64_t>();
    const int horizon = msg["horizon"].get<int>();
    if (mode == "exit") return 0;
    if (mode == "garbage") {
      std::cout << "this is not json" << std::endl;
      continue;
    }
    if (mode == "error") {
      std::cout << json{{"type", "error"}, {"id", id}, {"message", "model not loaded"}}.dump() << std::endl;
      continue;
    }
    if (mode == "slow") std::this_thread::sleep_for(std::chrono::seconds(3));
    json reply = {{"type", "prediction"}, {"id", mode == "wrong_id" ? id + 7 : id}};
    reply["steps"] = hold_last(msg, mode == "short" ? horizon - 1 : horizon, mode == "rho1" ? 1.0 : 0.0);
    std::cout << reply.dump() << std::endl;
  }
  return 0;
}
