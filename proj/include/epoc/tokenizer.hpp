#ifndef EPOC_TOKENIZER_HPP
#define EPOC_TOKENIZER_HPP

#include <string>

#include "epoc/patch.hpp"
#include "epoc/raster.hpp"
#include "epoc/slic.hpp"
#include "epoc/watershed.hpp"

namespace epoc {

enum class Method { patch, slic, epoc };

inline Method parse_method(const std::string& name) {
  if (name == "patch") return Method::patch;
  if (name == "slic") return Method::slic;
  if (name == "epoc") return Method::epoc;
  throw ValidationError("unknown tokenizer method '" + name + "' (expected patch, slic or epoc)");
}

inline const char* to_string(Method m) {
  switch (m) {
    case Method::patch: return "patch";
    case Method::slic: return "slic";
    case Method::epoc: return "epoc";
  }
  return "?";
}

/// A tokenizer method plus its hyperparameters. For epoc on raw images the
/// boundary map comes from gradient_boundary with `boundary_radius`.
struct TokenizerSpec {
  Method method = Method::patch;
  PatchConfig patch;
  SlicConfig slic;
  WatershedConfig watershed;
  int boundary_radius = 2;

  void validate() const {
    switch (method) {
      case Method::patch:
        if (patch.p < 1) throw ValidationError("invalid granularity: p must be >= 1");
        break;
      case Method::slic: slic.validate(); break;
      case Method::epoc:
        watershed.validate();
        if (boundary_radius < 0) throw ValidationError("boundary radius must be >= 0");
        break;
    }
  }
};

inline TokenIndexMap tokenize_image(const TokenizerSpec& spec, const RasterImage& img) {
  switch (spec.method) {
    case Method::patch: return patch_segment(img.height(), img.width(), spec.patch);
    case Method::slic: return slic_segment(img, spec.slic);
    case Method::epoc: return epoc_segment(gradient_boundary(img, spec.boundary_radius), spec.watershed);
  }
  throw ValidationError("unknown tokenizer method");
}

}  // namespace epoc

#endif  // EPOC_TOKENIZER_HPP
