# Modules package initialization