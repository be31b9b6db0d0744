#pragma once

#include "akns/core.hpp"
#include "akns/quadrature.hpp"
#include "akns/fourier.hpp"
#include "akns/charfn.hpp"
#include "akns/forward.hpp"
#include "akns/krein.hpp"
#include "akns/io.hpp"
#include "akns/pipeline.hpp"
