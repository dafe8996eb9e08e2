// Spectral synthesis walkthrough: turn one RGB pixel into a 300-channel
// spectrum and show how the anchor wavelengths pin the curve to the original
// red, green, and blue values.

#include <cstdio>

#include "specsel/datacube.hpp"

using namespace specsel;

int main() {
  WavelengthGrid grid = WavelengthGrid::standard();

  RgbImage img;
  img.height = 1;
  img.width = 2;
  img.values = {0.8f, 0.3f, 0.1f,   // a warm pixel
                0.5f, 0.5f, 0.5f};  // a gray pixel
  SpectralCube cube = synthesize_hsi(img, grid);

  std::printf("grid: %zu channels from %.1f to %.1f nm\n", grid.size(), grid.points.front(),
              grid.points.back());
  std::printf("warm pixel rgb = (0.80, 0.30, 0.10)\n");
  std::printf("%-12s %-12s %s\n", "wavelength", "channel", "value");
  for (std::size_t c = 0; c < grid.size(); c += 30)
    std::printf("%8.1f nm %8zu    %.4f\n", grid.points[c], c, cube.at(c, 0, 0));

  std::printf("\ngray pixel spectrum is constant: first %.4f, middle %.4f, last %.4f\n",
              cube.at(0, 0, 1), cube.at(grid.size() / 2, 0, 1), cube.at(grid.size() - 1, 0, 1));

  MinMaxStats stats = minmax_fit({&cube});
  SpectralCube scaled = minmax_apply(cube, stats);
  std::printf("after per-channel min-max scaling, channel 0 spans [%.3f, %.3f]\n",
              scaled.at(0, 0, 0) < scaled.at(0, 0, 1) ? scaled.at(0, 0, 0) : scaled.at(0, 0, 1),
              scaled.at(0, 0, 0) < scaled.at(0, 0, 1) ? scaled.at(0, 0, 1) : scaled.at(0, 0, 0));
  return 0;
}
