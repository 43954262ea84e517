#pragma once

#include "spectra/error.hpp"
#include "spectra/core_model.hpp"
#include "spectra/serialization.hpp"
#include "spectra/parallel.hpp"
#include "spectra/ingestion.hpp"
#include "spectra/region_analysis.hpp"
#include "spectra/clustering.hpp"
#include "spectra/synthesis.hpp"
#include "spectra/metrics.hpp"
#include "spectra/references.hpp"
#include "spectra/export.hpp"
