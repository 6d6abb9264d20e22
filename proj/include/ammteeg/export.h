// Copyright 2026 The AM-MTEEG Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AMMTEEG_EXPORT_H_
#define AMMTEEG_EXPORT_H_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ammteeg/data.h"
#include "ammteeg/tensor.h"

namespace ammteeg {

// "channel,timestep,value" rows of a [channels x length] tensor, values at
// full double precision.
void WriteWaveformCsv(std::ostream& out, const Tensor& waveform);

// "class,channel,timestep,value" rows for every class mean.
void WriteErpCsv(std::ostream& out, const Erp& erp);

struct PlotSeries {
  std::string name;
  std::vector<double> values;
};

// Line plot with a fixed 800x400 viewbox, one polyline per series and a
// shared vertical scale.
void WriteLinePlotSvg(std::ostream& out, const std::string& title,
                      const std::vector<PlotSeries>& series);

// One series per channel of a [channels x length] tensor.
std::vector<PlotSeries> ChannelSeries(const Tensor& waveform,
                                      const std::string& prefix = "ch");

// Pearson correlation; 0 when either side is constant.
double PearsonCorrelation(std::span<const double> a, std::span<const double> b);

}  // namespace ammteeg

#endif  // AMMTEEG_EXPORT_H_
