# Infrastructure package 