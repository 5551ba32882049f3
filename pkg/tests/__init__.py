# Tests package for Artinerary application
