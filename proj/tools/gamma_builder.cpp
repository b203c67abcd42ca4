// Builds the shipped Gamma tables: one p = 20 run, written for p = 5, 10, 15, 20.

#include <iostream>
#include <string>

#include "mir/gamma_table.hpp"

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : MIR_DATA_DIR;
  try {
    mir::QuadratureSettings qs;
    const mir::GammaTable full = mir::build_gamma_table(20, mir::default_grid(), qs, 0, &std::cerr);
    for (int p : {5, 10, 15, 20}) {
      mir::GammaTable t = p == 20 ? full : full.leading(p);
      const std::string path = dir + "/gamma_p" + std::to_string(p) + ".txt";
      mir::save_gamma_table(t, path);
      std::cout << path << "  sigma_p(0.5) = " << mir::sigma_p(t, 0.5) << '\n';
    }
  } catch (const mir::Error& e) {
    std::cerr << mir::errc_tag(e.code()) << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
