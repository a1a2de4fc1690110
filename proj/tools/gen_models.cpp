// Writes every builtin model to <dir>/<name>.json so the CLI can resolve
// bundled names from disk and tests can verify the round trip.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "ldlab/model.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: gen_models <output-dir>\n";
    return 2;
  }
  std::filesystem::path dir(argv[1]);
  std::filesystem::create_directories(dir);
  for (const auto& name : ldlab::builtin_model_names()) {
    auto path = dir / (name + ".json");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
      std::cerr << "cannot write " << path << "\n";
      return 1;
    }
    out << ldlab::model_to_json(ldlab::builtin_model(name)) << "\n";
    std::cout << "wrote " << path.string() << "\n";
  }
  return 0;
}
