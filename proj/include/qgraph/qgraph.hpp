#pragma once

#include "qgraph/io.hpp"
#include "qgraph/parallel.hpp"
#include "qgraph/spectrum.hpp"
