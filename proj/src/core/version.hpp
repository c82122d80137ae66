#pragma once

#define RELIAFIT_VERSION_STRING "0.1.0"
