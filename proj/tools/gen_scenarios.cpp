// Regenerates the shipped scenario files and the labeled buggy candidate
// from the in-library builders. Run from the repo root:
//   build/tools/gen_scenarios data

#include "optiloop/faults.hpp"
#include "optiloop/scenarios.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace optiloop;

static void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
  std::cout << "wrote " << path.string() << " (" << bytes.size() << " bytes)\n";
}

int main(int argc, char** argv) {
  std::filesystem::path root = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(root / "scenarios");
  std::filesystem::create_directories(root / "candidates");

  const char* names[] = {"example1.json", "example2.json", "example3.json"};
  auto scenarios = shipped_scenarios();
  for (size_t i = 0; i < scenarios.size(); ++i) {
    write_file(root / "scenarios" / names[i], emit_scenario(scenarios[i]));
  }

  // the miscompiled spurious-production variant of example 2, shipped as a
  // labeled candidate with its ground-truth repair sidecar
  auto s2 = example2();
  auto buggy = canonical(example2_buggy_production_ir());
  write_file(root / "candidates" / "example2_spurious_production.json",
             ir_to_json(buggy).dump(2) + "\n");

  nlohmann::json meta;
  meta["scenario"] = s2.name;
  meta["kind"] = "spurious_production";
  meta["target"] = "prod";
  meta["interface_fault"] = "none";
  meta["designated_checks"] = std::vector<int>{8};
  meta["note"] =
      "hand-authored variant: a controllable production variable feeds the "
      "balance next to the fixed procurement inflow, so fulfilled units dodge "
      "the production cost; repair replaces the whole formulation";
  meta["reference"] = ir_to_json(canonical(s2.reference));
  write_file(root / "candidates" / "example2_spurious_production.meta.json",
             meta.dump(2) + "\n");

  return 0;
}
