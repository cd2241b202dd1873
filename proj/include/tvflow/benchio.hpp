#pragma once

#include <string>
#include <vector>

#include "tvflow/field.hpp"

namespace tvflow {

// Values at or above this magnitude mark unknown flow in ground-truth files.
constexpr double kInvalidFlowThresh = 1e9;

// Binary .flo layout, little-endian: float32 magic 202021.25 ("PIEH"),
// int32 width, int32 height, then row-major interleaved (u, v) float32 pairs.
FlowField read_flo(const std::string& path);
void write_flo(const std::string& path, const FlowField& flow);

struct EvalResult {
  double aae_deg = 0.0;
  double epe_px = 0.0;
  long valid_pixel_count = 0;
};

// Mean angular error in degrees between the space-time normalized vectors
// (u, v, 1). Pixels with unknown ground truth are excluded; throws EvalError
// when nothing remains.
double aae(const FlowField& est, const FlowField& gt);

// Mean Euclidean endpoint error in pixels over the valid ground-truth mask.
double epe(const FlowField& est, const FlowField& gt);

EvalResult evaluate_flow(const FlowField& est, const FlowField& gt);

struct RgbImage {
  int w = 0;
  int h = 0;
  std::vector<unsigned char> rgb;  // row-major, 3 bytes per pixel

  RgbImage() = default;
  RgbImage(int width, int height)
      : w(width), h(height), rgb(static_cast<std::size_t>(width) * height * 3, 0) {}
};

// Middlebury color coding: hue from the flow direction on a 55-entry wheel,
// saturation from magnitude / max_mag (clamped to 1). Zero flow maps to
// white, unknown pixels to black. max_mag <= 0 picks the max magnitude of
// the field.
RgbImage flow_to_color(const FlowField& flow, double max_mag = 0.0);

// Grayscale ingestion for PGM (P2/P5) and PNG. Output values lie in [0, 1];
// color PNGs are reduced by luma = 0.299 R + 0.587 G + 0.114 B.
ScalarField read_gray_image(const std::string& path);

void write_png_rgb(const std::string& path, const RgbImage& img);
void write_pgm(const std::string& path, const ScalarField& img);  // binary P5, 8 bit

}  // namespace tvflow
