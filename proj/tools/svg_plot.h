#ifndef CPI_TOOLS_SVG_PLOT_H_
#define CPI_TOOLS_SVG_PLOT_H_

#include <string>
#include <vector>

#include "cpi/core_model.h"

namespace cpi {

// Gray level (0 black .. 255 white) for |psi| on a path whose PSI ranges over
// [min_psi, max_psi]. The minimum maps to the lightest shade.
int PsiGrayLevel(double psi, double min_psi, double max_psi);

// Renders the paths over a log2 bandwidth axis and a latency axis with low
// latency at the bottom. Invalid envelopes are skipped. Output depends only
// on the inputs.
std::string RenderPlotSvg(const std::vector<CpiPath>& paths,
                          const std::vector<Envelope>& envelopes);

}  // namespace cpi

#endif  // CPI_TOOLS_SVG_PLOT_H_
