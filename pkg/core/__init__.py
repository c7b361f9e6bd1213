# Core business logic package 