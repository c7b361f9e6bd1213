# Workers package 