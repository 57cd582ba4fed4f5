"""Call-by-value letrec with size indications, compiled by in-place update."""
