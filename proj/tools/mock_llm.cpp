#include <iostream>

#include <CLI11.hpp>

#include "pct/mock/mock_openai.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Deterministic OpenAI-compatible mock server"};
  std::string host = "127.0.0.1";
  int port = 8000;
  app.add_option("--host", host)->capture_default_str();
  app.add_option("--port", port)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  pct::mock::MockOpenAi server;
  std::cerr << "mock endpoint at http://" << host << ':' << port << "/v1\n";
  try {
    server.listen(host, port);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  return 0;
}
